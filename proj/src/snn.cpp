#include "snnvi/snn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snnvi/mathutil.hpp"

namespace snnvi {

namespace {

constexpr uint64_t kDropoutTag1 = 1, kDropoutTag2 = 2, kDropoutTagOut = 3;
constexpr uint64_t kInitTagW1 = 10, kInitTagW2 = 11, kInitTagWOut = 12;

double soft_spike(double u, const LifLayerConfig& cfg) {
    const double z = (u - cfg.v_th) / (2.0 * cfg.boxcar_halfwidth) + 0.5;
    return std::clamp(z, 0.0, 1.0);
}

double soft_spike_deriv(double u, const LifLayerConfig& cfg) {
    return std::abs(u - cfg.v_th) <= cfg.boxcar_halfwidth ? 1.0 / (2.0 * cfg.boxcar_halfwidth) : 0.0;
}

// One BN site's forward state.
struct BnSite {
    std::vector<double> mean, var;  // statistics actually used
    Mat xhat;
};

void bn_forward(const Mat& in, std::span<const double> gamma, std::span<const double> beta,
                bool batch_stats, std::span<const double> run_mean,
                std::span<const double> run_var, double eps, Mat& out, BnSite& site) {
    const int m = in.rows, n = in.cols;
    site.mean.assign(size_t(n), 0.0);
    site.var.assign(size_t(n), 0.0);
    if (batch_stats) {
        for (int r = 0; r < m; ++r) {
            const double* row = in.row(r);
            for (int j = 0; j < n; ++j) site.mean[size_t(j)] += row[j];
        }
        for (double& v : site.mean) v /= m;
        for (int r = 0; r < m; ++r) {
            const double* row = in.row(r);
            for (int j = 0; j < n; ++j) {
                const double d = row[j] - site.mean[size_t(j)];
                site.var[size_t(j)] += d * d;
            }
        }
        for (double& v : site.var) v /= m;  // biased variance
    } else {
        site.mean.assign(run_mean.begin(), run_mean.end());
        site.var.assign(run_var.begin(), run_var.end());
    }
    site.xhat = Mat(m, n);
    out = Mat(m, n);
    std::vector<double> inv(size_t(n));
    for (int j = 0; j < n; ++j) inv[size_t(j)] = 1.0 / std::sqrt(site.var[size_t(j)] + eps);
    parallel_for(m, [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            const double* row = in.row(r);
            double* xh = site.xhat.row(r);
            double* o = out.row(r);
            for (int j = 0; j < n; ++j) {
                xh[j] = (row[j] - site.mean[size_t(j)]) * inv[size_t(j)];
                o[j] = gamma[size_t(j)] * xh[j] + beta[size_t(j)];
            }
        }
    });
}

// Backward through a BN site. gy is consumed; gx written. Returns dgamma,
// dbeta through out-params.
void bn_backward(const Mat& gy, const BnSite& site, std::span<const double> gamma, double eps,
                 bool batch_stats, Mat& gx, std::vector<double>& dgamma,
                 std::vector<double>& dbeta) {
    const int m = gy.rows, n = gy.cols;
    dgamma.assign(size_t(n), 0.0);
    dbeta.assign(size_t(n), 0.0);
    for (int r = 0; r < m; ++r) {
        const double* g = gy.row(r);
        const double* xh = site.xhat.row(r);
        for (int j = 0; j < n; ++j) {
            dgamma[size_t(j)] += g[j] * xh[j];
            dbeta[size_t(j)] += g[j];
        }
    }
    gx = Mat(m, n);
    std::vector<double> inv(size_t(n));
    for (int j = 0; j < n; ++j) inv[size_t(j)] = 1.0 / std::sqrt(site.var[size_t(j)] + eps);
    if (batch_stats) {
        parallel_for(m, [&](int lo, int hi) {
            for (int r = lo; r < hi; ++r) {
                const double* g = gy.row(r);
                const double* xh = site.xhat.row(r);
                double* out = gx.row(r);
                for (int j = 0; j < n; ++j)
                    out[j] = gamma[size_t(j)] * inv[size_t(j)] *
                             (g[j] - dbeta[size_t(j)] / m - xh[j] * dgamma[size_t(j)] / m);
            }
        });
    } else {
        parallel_for(m, [&](int lo, int hi) {
            for (int r = lo; r < hi; ++r) {
                const double* g = gy.row(r);
                double* out = gx.row(r);
                for (int j = 0; j < n; ++j) out[j] = gamma[size_t(j)] * inv[size_t(j)] * g[j];
            }
        });
    }
}

// Batched LIF over rows b*T+t. Writes spikes, membranes.
void lif_batched(const LifLayerConfig& cfg, const Mat& drive, int batch, int frames, bool soft,
                 Mat& spikes, Mat& membranes) {
    const int n = drive.cols;
    spikes = Mat(drive.rows, n);
    membranes = Mat(drive.rows, n);
    parallel_for(batch, [&](int blo, int bhi) {
        for (int b = blo; b < bhi; ++b) {
            std::vector<double> u_prev(size_t(n), 0.0), s_prev(size_t(n), 0.0);
            for (int t = 0; t < frames; ++t) {
                const int r = b * frames + t;
                const double* d = drive.row(r);
                double* u = membranes.row(r);
                double* s = spikes.row(r);
                for (int j = 0; j < n; ++j) {
                    const double uj = cfg.alpha * u_prev[size_t(j)] + d[j] - cfg.v_th * s_prev[size_t(j)];
                    u[j] = uj;
                    s[j] = soft ? soft_spike(uj, cfg) : (uj >= cfg.v_th ? 1.0 : 0.0);
                }
                std::copy(u, u + n, u_prev.begin());
                std::copy(s, s + n, s_prev.begin());
            }
        }
    });
}

// Reverse LIF pass: gs_direct (grad on post-LIF spikes) -> gdrive.
void lif_backward(const LifLayerConfig& cfg, const Mat& membranes, const Mat& gs_direct,
                  int batch, int frames, bool soft, Mat& gdrive) {
    const int n = gs_direct.cols;
    gdrive = Mat(gs_direct.rows, n);
    parallel_for(batch, [&](int blo, int bhi) {
        for (int b = blo; b < bhi; ++b) {
            std::vector<double> gu_next(size_t(n), 0.0);
            for (int t = frames - 1; t >= 0; --t) {
                const int r = b * frames + t;
                const double* u = membranes.row(r);
                const double* gs = gs_direct.row(r);
                double* gd = gdrive.row(r);
                for (int j = 0; j < n; ++j) {
                    const double sder =
                        soft ? soft_spike_deriv(u[j], cfg) : boxcar_surrogate(u[j], cfg);
                    const double gs_total = gs[j] - cfg.v_th * gu_next[size_t(j)];
                    const double gu = gs_total * sder + cfg.alpha * gu_next[size_t(j)];
                    gd[j] = gu;
                    gu_next[size_t(j)] = gu;
                }
            }
        }
    });
}

void apply_mask(const Mat& in, const Mat& mask, Mat& out) {
    out = Mat(in.rows, in.cols);
    for (size_t i = 0; i < in.a.size(); ++i) out.a[i] = in.a[i] * mask.a[i];
}

struct Work {
    int batch = 0, frames = 0;
    bool batch_stats = false, soft = false;
    Mat x_in;                    // (B*T) x F
    Mat a1, d1, u1, s1, sd1;     // layer 1 tensors
    Mat a2, d2, u2, s2, sd2;     // layer 2 tensors
    BnSite bn1, bn2, bno;
    Mat mask1, mask2, mask_out;  // empty when inactive
    Mat rate, rate_bn, rate_dropped;
    Mat logits;
};

void run_forward(Network& net, const Batch& batch, Mode mode, const RngStream& rng, Work& w) {
    const Architecture& arch = net.arch;
    arch.validate();
    if (batch.empty()) throw std::invalid_argument("network_forward: empty batch");
    for (const FeatureSequence* fs : batch) {
        if (fs->features.rows != arch.frames || fs->features.cols != arch.channels)
            throw std::invalid_argument("network_forward: sequence shape mismatch");
    }
    const int B = int(batch.size()), T = arch.frames, F = arch.channels;
    const int n1 = arch.layer1.n_out, n2 = arch.layer2.n_out, C = arch.num_classes;

    w.batch = B;
    w.frames = T;
    w.soft = (mode == Mode::Soft);
    w.batch_stats = (mode != Mode::Eval) && !net.bn.frozen;
    const bool update_running = (mode == Mode::Train) && !net.bn.frozen;
    const bool dropout_on = (mode != Mode::Eval);

    w.x_in = Mat(B * T, F);
    for (int b = 0; b < B; ++b)
        std::copy(batch[size_t(b)]->features.a.begin(), batch[size_t(b)]->features.a.end(),
                  w.x_in.row(b * T));

    auto run_hidden = [&](const LifLayerConfig& cfg, const Mat& x, const Mat& weight,
                          std::span<const double> gamma, std::span<const double> beta,
                          std::vector<double>& run_mean, std::vector<double>& run_var,
                          uint64_t drop_tag, Mat& a, Mat& d, BnSite& site, Mat& u, Mat& s,
                          Mat& mask, Mat& sd) {
        matmul_nt(x, weight, a);
        bn_forward(a, gamma, beta, w.batch_stats, run_mean, run_var, arch.bn_eps, d, site);
        if (update_running) {
            for (size_t j = 0; j < run_mean.size(); ++j) {
                run_mean[j] = (1.0 - arch.bn_momentum) * run_mean[j] + arch.bn_momentum * site.mean[j];
                run_var[j] = (1.0 - arch.bn_momentum) * run_var[j] + arch.bn_momentum * site.var[j];
            }
        }
        lif_batched(cfg, d, B, T, w.soft, s, u);
        if (dropout_on && cfg.dropout_p > 0.0) {
            mask = dropout_mask(B * T, cfg.n_out, cfg.dropout_p, rng.substream(drop_tag));
            apply_mask(s, mask, sd);
        } else {
            mask = Mat();
            sd = s;
        }
    };

    run_hidden(arch.layer1, w.x_in, net.params.w1, net.params.bn1_gamma, net.params.bn1_beta,
               net.bn.mean1, net.bn.var1, kDropoutTag1, w.a1, w.d1, w.bn1, w.u1, w.s1, w.mask1,
               w.sd1);
    run_hidden(arch.layer2, w.sd1, net.params.w2, net.params.bn2_gamma, net.params.bn2_beta,
               net.bn.mean2, net.bn.var2, kDropoutTag2, w.a2, w.d2, w.bn2, w.u2, w.s2, w.mask2,
               w.sd2);

    // Spike-rate readout: average the last layer's (post-dropout) spike train.
    w.rate = Mat(B, n2);
    for (int b = 0; b < B; ++b) {
        double* rrow = w.rate.row(b);
        for (int t = 0; t < T; ++t) {
            const double* srow = w.sd2.row(b * T + t);
            for (int j = 0; j < n2; ++j) rrow[j] += srow[j];
        }
        for (int j = 0; j < n2; ++j) rrow[j] /= T;
    }
    bn_forward(w.rate, net.params.bno_gamma, net.params.bno_beta, w.batch_stats, net.bn.mean_out,
               net.bn.var_out, arch.bn_eps, w.rate_bn, w.bno);
    if (update_running) {
        for (size_t j = 0; j < net.bn.mean_out.size(); ++j) {
            net.bn.mean_out[j] =
                (1.0 - arch.bn_momentum) * net.bn.mean_out[j] + arch.bn_momentum * w.bno.mean[j];
            net.bn.var_out[j] =
                (1.0 - arch.bn_momentum) * net.bn.var_out[j] + arch.bn_momentum * w.bno.var[j];
        }
    }
    if (dropout_on && arch.readout_dropout_p > 0.0) {
        w.mask_out = dropout_mask(B, n2, arch.readout_dropout_p, rng.substream(kDropoutTagOut));
        apply_mask(w.rate_bn, w.mask_out, w.rate_dropped);
    } else {
        w.mask_out = Mat();
        w.rate_dropped = w.rate_bn;
    }

    matmul_nt(w.rate_dropped, net.params.w_out, w.logits);
    for (int b = 0; b < B; ++b) {
        double* z = w.logits.row(b);
        for (int k = 0; k < C; ++k) z[k] += net.params.b_out[size_t(k)];
    }
}

void fill_trace(const Work& w, ForwardTrace& trace) {
    trace.membranes1 = w.u1;
    trace.spikes1 = w.s1;
    trace.drive1 = w.d1;
    trace.membranes2 = w.u2;
    trace.spikes2 = w.s2;
    trace.drive2 = w.d2;
    trace.rate = w.rate;
    trace.logits = w.logits;
    trace.bn1_mean = w.bn1.mean;
    trace.bn1_var = w.bn1.var;
    trace.bn2_mean = w.bn2.mean;
    trace.bn2_var = w.bn2.var;
    trace.bno_mean = w.bno.mean;
    trace.bno_var = w.bno.var;
}

}  // namespace

void LifLayerConfig::validate() const {
    if (n_in < 1 || n_out < 1) throw std::invalid_argument("LifLayerConfig: dims must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("LifLayerConfig: alpha must lie strictly inside (0,1)");
    if (!(v_th > 0.0)) throw std::invalid_argument("LifLayerConfig: v_th must be > 0");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0))
        throw std::invalid_argument("LifLayerConfig: dropout_p must lie in [0,1)");
    if (!(boxcar_halfwidth > 0.0) || !(boxcar_gain > 0.0))
        throw std::invalid_argument("LifLayerConfig: boxcar parameters must be > 0");
}

Architecture Architecture::make(int channels, int frames, int num_classes, int hidden1,
                                int hidden2) {
    Architecture a;
    a.channels = channels;
    a.frames = frames;
    a.num_classes = num_classes;
    a.layer1.n_in = channels;
    a.layer1.n_out = hidden1;
    a.layer2.n_in = hidden1;
    a.layer2.n_out = hidden2;
    a.validate();
    return a;
}

void Architecture::validate() const {
    if (channels < 1 || frames < 1 || num_classes < 2)
        throw std::invalid_argument("Architecture: need channels>=1, frames>=1, classes>=2");
    layer1.validate();
    layer2.validate();
    if (layer1.n_in != channels || layer2.n_in != layer1.n_out)
        throw std::invalid_argument("Architecture: layer dims do not chain");
    if (!(readout_dropout_p >= 0.0 && readout_dropout_p < 1.0))
        throw std::invalid_argument("Architecture: readout_dropout_p must lie in [0,1)");
}

int Architecture::flat_dim() const {
    const int n1 = layer1.n_out, n2 = layer2.n_out;
    return n1 * channels + 2 * n1 + n2 * n1 + 2 * n2 + 2 * n2 + num_classes * n2 + num_classes;
}

std::vector<double> flatten(const NetworkParams& p) {
    std::vector<double> flat;
    flat.reserve(p.w1.a.size() + p.bn1_gamma.size() * 2 + p.w2.a.size() + p.bn2_gamma.size() * 2 +
                 p.bno_gamma.size() * 2 + p.w_out.a.size() + p.b_out.size());
    auto append = [&flat](const auto& v) { flat.insert(flat.end(), v.begin(), v.end()); };
    append(p.w1.a);
    append(p.bn1_gamma);
    append(p.bn1_beta);
    append(p.w2.a);
    append(p.bn2_gamma);
    append(p.bn2_beta);
    append(p.bno_gamma);
    append(p.bno_beta);
    append(p.w_out.a);
    append(p.b_out);
    return flat;
}

NetworkParams unflatten(const Architecture& arch, std::span<const double> flat) {
    if (int(flat.size()) != arch.flat_dim())
        throw std::invalid_argument("unflatten: flat vector length " + std::to_string(flat.size()) +
                                    " does not match flat_dim " + std::to_string(arch.flat_dim()));
    const int F = arch.channels, n1 = arch.layer1.n_out, n2 = arch.layer2.n_out,
              C = arch.num_classes;
    NetworkParams p;
    size_t pos = 0;
    auto take_mat = [&](int r, int c) {
        Mat m(r, c);
        std::copy(flat.begin() + long(pos), flat.begin() + long(pos) + r * c, m.a.begin());
        pos += size_t(r) * c;
        return m;
    };
    auto take_vec = [&](int n) {
        std::vector<double> v(flat.begin() + long(pos), flat.begin() + long(pos) + n);
        pos += size_t(n);
        return v;
    };
    p.w1 = take_mat(n1, F);
    p.bn1_gamma = take_vec(n1);
    p.bn1_beta = take_vec(n1);
    p.w2 = take_mat(n2, n1);
    p.bn2_gamma = take_vec(n2);
    p.bn2_beta = take_vec(n2);
    p.bno_gamma = take_vec(n2);
    p.bno_beta = take_vec(n2);
    p.w_out = take_mat(C, n2);
    p.b_out = take_vec(C);
    return p;
}

Network init_network(const Architecture& arch, const RngStream& rng) {
    arch.validate();
    const int F = arch.channels, n1 = arch.layer1.n_out, n2 = arch.layer2.n_out,
              C = arch.num_classes;
    Network net;
    net.arch = arch;
    auto fill_uniform = [](Mat& m, const RngStream& s) {
        const double bound = std::sqrt(6.0 / (m.rows + m.cols));
        for (size_t i = 0; i < m.a.size(); ++i) m.a[i] = bound * (2.0 * s.uniform_at(i) - 1.0);
    };
    net.params.w1 = Mat(n1, F);
    fill_uniform(net.params.w1, rng.substream(kInitTagW1));
    net.params.w2 = Mat(n2, n1);
    fill_uniform(net.params.w2, rng.substream(kInitTagW2));
    net.params.w_out = Mat(C, n2);
    fill_uniform(net.params.w_out, rng.substream(kInitTagWOut));
    net.params.bn1_gamma.assign(size_t(n1), 1.0);
    net.params.bn1_beta.assign(size_t(n1), 0.0);
    net.params.bn2_gamma.assign(size_t(n2), 1.0);
    net.params.bn2_beta.assign(size_t(n2), 0.0);
    net.params.bno_gamma.assign(size_t(n2), 1.0);
    net.params.bno_beta.assign(size_t(n2), 0.0);
    net.params.b_out.assign(size_t(C), 0.0);
    net.bn.mean1.assign(size_t(n1), 0.0);
    net.bn.var1.assign(size_t(n1), 1.0);
    net.bn.mean2.assign(size_t(n2), 0.0);
    net.bn.var2.assign(size_t(n2), 1.0);
    net.bn.mean_out.assign(size_t(n2), 0.0);
    net.bn.var_out.assign(size_t(n2), 1.0);
    return net;
}

Batch gather(const Dataset& ds, const std::vector<int>& ids) {
    Batch b;
    b.reserve(ids.size());
    for (int id : ids) {
        if (id < 0 || size_t(id) >= ds.sequences.size())
            throw std::invalid_argument("gather: index out of range");
        b.push_back(&ds.sequences[size_t(id)]);
    }
    return b;
}

Mat network_forward(Network& net, const Batch& batch, Mode mode, const RngStream& rng,
                    ForwardTrace* trace) {
    Work w;
    run_forward(net, batch, mode, rng, w);
    if (trace) fill_trace(w, *trace);
    return w.logits;
}

double boxcar_surrogate(double u, const LifLayerConfig& cfg) {
    return std::abs(u - cfg.v_th) <= cfg.boxcar_halfwidth ? cfg.boxcar_gain : 0.0;
}

Mat dropout_mask(int rows, int cols, double p, const RngStream& stream) {
    Mat mask(rows, cols);
    const double scale = 1.0 / (1.0 - p);
    parallel_for(rows, [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            double* mrow = mask.row(r);
            for (int j = 0; j < cols; ++j)
                mrow[j] = stream.uniform_at(uint64_t(r) * cols + uint64_t(j)) >= p ? scale : 0.0;
        }
    });
    return mask;
}

void lif_forward(const LifLayerConfig& cfg, const Mat& drive, Mat& spikes, Mat& membranes) {
    for (double v : drive.a)
        if (!std::isfinite(v)) throw std::invalid_argument("lif_forward: non-finite drive");
    lif_batched(cfg, drive, 1, drive.rows, false, spikes, membranes);
}

LossGrad loss_and_gradients(Network& net, const Batch& batch, Mode mode, const RngStream& rng) {
    Work w;
    run_forward(net, batch, mode, rng, w);
    const Architecture& arch = net.arch;
    const int B = w.batch, T = w.frames, C = arch.num_classes;
    const int n1 = arch.layer1.n_out, n2 = arch.layer2.n_out;

    LossGrad out;
    Mat gz(B, C);
    for (int b = 0; b < B; ++b) {
        const int y = batch[size_t(b)]->label;
        if (y < 0 || y >= C) throw std::invalid_argument("loss_and_gradients: label out of range");
        const double* z = w.logits.row(b);
        out.loss += cross_entropy(std::span<const double>(z, size_t(C)), y) / B;
        auto p = softmax(std::span<const double>(z, size_t(C)));
        double* g = gz.row(b);
        for (int k = 0; k < C; ++k) g[k] = (p[size_t(k)] - (k == y ? 1.0 : 0.0)) / B;
    }

    // readout linear
    Mat d_wout(C, n2);
    matmul_tn_add(gz, w.rate_dropped, d_wout);
    std::vector<double> d_bout(size_t(C), 0.0);
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < C; ++k) d_bout[size_t(k)] += gz.at(b, k);
    Mat g_rate_dropped;
    matmul_nn(gz, net.params.w_out, g_rate_dropped);

    // readout dropout + BN
    Mat g_rate_bn;
    if (w.mask_out.rows > 0)
        apply_mask(g_rate_dropped, w.mask_out, g_rate_bn);
    else
        g_rate_bn = g_rate_dropped;
    Mat g_rate;
    std::vector<double> d_bno_gamma, d_bno_beta;
    bn_backward(g_rate_bn, w.bno, net.params.bno_gamma, arch.bn_eps, w.batch_stats, g_rate,
                d_bno_gamma, d_bno_beta);

    // rate -> per-step spike grads
    Mat g_sd2(B * T, n2);
    for (int b = 0; b < B; ++b) {
        const double* gr = g_rate.row(b);
        for (int t = 0; t < T; ++t) {
            double* g = g_sd2.row(b * T + t);
            for (int j = 0; j < n2; ++j) g[j] = gr[j] / T;
        }
    }

    auto backward_hidden = [&](const LifLayerConfig& cfg, const Mat& mask, const Mat& membranes,
                               const BnSite& site, std::span<const double> gamma, const Mat& g_sd,
                               Mat& g_drive_bn, std::vector<double>& dgamma,
                               std::vector<double>& dbeta, Mat& g_a) {
        Mat g_s;
        if (mask.rows > 0)
            apply_mask(g_sd, mask, g_s);
        else
            g_s = g_sd;
        lif_backward(cfg, membranes, g_s, B, T, w.soft, g_drive_bn);
        bn_backward(g_drive_bn, site, gamma, arch.bn_eps, w.batch_stats, g_a, dgamma, dbeta);
    };

    Mat g_d2, g_a2;
    std::vector<double> d_bn2_gamma, d_bn2_beta;
    backward_hidden(arch.layer2, w.mask2, w.u2, w.bn2, net.params.bn2_gamma, g_sd2, g_d2,
                    d_bn2_gamma, d_bn2_beta, g_a2);
    Mat d_w2(n2, n1);
    matmul_tn_add(g_a2, w.sd1, d_w2);
    Mat g_sd1;
    matmul_nn(g_a2, net.params.w2, g_sd1);

    Mat g_d1, g_a1;
    std::vector<double> d_bn1_gamma, d_bn1_beta;
    backward_hidden(arch.layer1, w.mask1, w.u1, w.bn1, net.params.bn1_gamma, g_sd1, g_d1,
                    d_bn1_gamma, d_bn1_beta, g_a1);
    Mat d_w1(n1, arch.channels);
    matmul_tn_add(g_a1, w.x_in, d_w1);

    NetworkParams g;
    g.w1 = std::move(d_w1);
    g.bn1_gamma = std::move(d_bn1_gamma);
    g.bn1_beta = std::move(d_bn1_beta);
    g.w2 = std::move(d_w2);
    g.bn2_gamma = std::move(d_bn2_gamma);
    g.bn2_beta = std::move(d_bn2_beta);
    g.bno_gamma = std::move(d_bno_gamma);
    g.bno_beta = std::move(d_bno_beta);
    g.w_out = std::move(d_wout);
    g.b_out = std::move(d_bout);
    out.grad = flatten(g);
    return out;
}

}  // namespace snnvi
