#include "snnvi/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "snnvi/errors.hpp"

namespace snnvi {

namespace {

int round_half_up(double x) { return int(std::floor(x + 0.5)); }

// Unbiased-enough bounded draw for shuffling (128-bit multiply-shift).
uint64_t bounded(uint64_t word, uint64_t n) {
    return uint64_t((static_cast<__uint128_t>(word) * n) >> 64);
}

}  // namespace

Mat synthetic_template(int cls, int num_classes, int frames, int channels) {
    const int group_a = channels / 2;
    Mat m(frames, channels);
    const double phase_a = 2.0 * std::numbers::pi * cls / num_classes;
    const double freq_a = double(cls + 1) / frames;    // integer cycles over the window
    const double freq_b = (cls + 0.5) / frames;        // half-integer cycles: nonzero mean
    for (int t = 0; t < frames; ++t) {
        const double ta = 2.0 * std::numbers::pi * (t + 1);
        for (int f = 0; f < channels; ++f) {
            const int in_group = f < group_a ? f : f - group_a;
            const int group_size = f < group_a ? group_a : channels - group_a;
            const double gain = 0.75 + 0.5 * double(in_group) / std::max(1, group_size - 1);
            const double s = f < group_a ? std::sin(ta * freq_a + phase_a) : std::sin(ta * freq_b);
            m.at(t, f) = gain * s;
        }
    }
    return m;
}

void assign_stratified_splits(const std::vector<int>& labels, int num_classes,
                              std::vector<int>& train_ids, std::vector<int>& val_ids,
                              std::vector<int>& test_ids) {
    train_ids.clear();
    val_ids.clear();
    test_ids.clear();
    std::vector<std::vector<int>> by_class(static_cast<size_t>(num_classes));
    for (size_t i = 0; i < labels.size(); ++i) by_class[size_t(labels[i])].push_back(int(i));
    for (const auto& ids : by_class) {
        const int p = int(ids.size());
        if (p == 0) continue;
        int n_val = 0, n_test = 0;
        if (p >= 5) {
            n_val = std::max(1, round_half_up(0.1 * p));
            n_test = std::max(1, round_half_up(0.2 * p));
        } else if (p >= 2) {
            n_test = 1;
        }
        const int n_train = p - n_val - n_test;
        for (int i = 0; i < n_train; ++i) train_ids.push_back(ids[size_t(i)]);
        for (int i = n_train; i < n_train + n_val; ++i) val_ids.push_back(ids[size_t(i)]);
        for (int i = n_train + n_val; i < p; ++i) test_ids.push_back(ids[size_t(i)]);
    }
}

Dataset gen_synthetic(int num_classes, int per_class, int frames, int channels,
                      double noise_std, const RngStream& seed) {
    if (num_classes < 2) throw std::invalid_argument("gen_synthetic: num_classes must be >= 2");
    if (frames < 4) throw std::invalid_argument("gen_synthetic: frames must be >= 4");
    if (channels < 2) throw std::invalid_argument("gen_synthetic: channels must be >= 2");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("gen_synthetic: noise_std must be >= 0");
    if (per_class < 5)
        throw std::invalid_argument("gen_synthetic: per_class must be >= 5 (split would be empty)");
    if (num_classes * 2 > frames)
        throw std::invalid_argument("gen_synthetic: need num_classes <= frames/2 for distinct templates");

    Dataset ds;
    ds.num_classes = num_classes;
    ds.frames = frames;
    ds.channels = channels;
    ds.sequences.reserve(size_t(num_classes) * per_class);
    std::vector<int> labels;
    for (int k = 0; k < num_classes; ++k) {
        const Mat tmpl = synthetic_template(k, num_classes, frames, channels);
        const RngStream class_stream = seed.substream(uint64_t(k));
        for (int i = 0; i < per_class; ++i) {
            const RngStream ex = class_stream.substream(uint64_t(i));
            FeatureSequence fs;
            fs.label = k;
            fs.features = tmpl;
            if (noise_std > 0.0) {
                for (size_t j = 0; j < fs.features.a.size(); ++j)
                    fs.features.a[j] += noise_std * ex.gaussian_at(j);
            }
            ds.sequences.push_back(std::move(fs));
            labels.push_back(k);
        }
    }
    assign_stratified_splits(labels, num_classes, ds.train_ids, ds.val_ids, ds.test_ids);
    return ds;
}

void save_features(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("save_features: cannot open " + path + " for writing");
    out << "SNNFEAT v1 " << ds.sequences.size() << ' ' << ds.frames << ' ' << ds.channels << ' '
        << ds.num_classes << '\n';
    std::string line;
    char buf[64];
    for (const auto& fs : ds.sequences) {
        line.clear();
        line += std::to_string(fs.label);
        for (double v : fs.features.a) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            line += ' ';
            line.append(buf, end);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw ParseError("save_features: write failed for " + path);
}

Dataset load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("load_features: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ":1: missing header");
    std::istringstream hs(header);
    std::string magic, version;
    long long n = -1;
    Dataset ds;
    if (!(hs >> magic >> version >> n >> ds.frames >> ds.channels >> ds.num_classes) ||
        magic != "SNNFEAT" || version != "v1")
        throw ParseError(path + ":1: malformed header, expected 'SNNFEAT v1 N T F C'");
    if (n < 0 || ds.frames < 1 || ds.channels < 1 || ds.num_classes < 2)
        throw ParseError(path + ":1: invalid dimensions in header");

    const size_t values_per_record = size_t(ds.frames) * size_t(ds.channels);
    ds.sequences.reserve(size_t(n));
    std::vector<int> labels;
    std::string line;
    for (long long rec = 0; rec < n; ++rec) {
        const long long line_no = rec + 2;
        if (!std::getline(in, line))
            throw ParseError(path + ":" + std::to_string(line_no) + ": truncated file, expected " +
                             std::to_string(n) + " records, got " + std::to_string(rec));
        const char* p = line.data();
        const char* end = p + line.size();
        int label = -1;
        auto lr = std::from_chars(p, end, label);
        if (lr.ec != std::errc())
            throw ParseError(path + ":" + std::to_string(line_no) + ": missing label");
        if (label < 0 || label >= ds.num_classes)
            throw ParseError(path + ":" + std::to_string(line_no) + ": label " +
                             std::to_string(label) + " out of range [0," +
                             std::to_string(ds.num_classes) + ")");
        p = lr.ptr;
        FeatureSequence fs;
        fs.label = label;
        fs.features = Mat(ds.frames, ds.channels);
        for (size_t j = 0; j < values_per_record; ++j) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            auto vr = std::from_chars(p, end, v);
            if (vr.ec != std::errc())
                throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(values_per_record) + " values, got " +
                                 std::to_string(j));
            if (!std::isfinite(v))
                throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value");
            fs.features.a[j] = v;
            p = vr.ptr;
        }
        while (p < end && *p == ' ') ++p;
        if (p != end)
            throw ParseError(path + ":" + std::to_string(line_no) + ": trailing data after " +
                             std::to_string(values_per_record) + " values");
        ds.sequences.push_back(std::move(fs));
        labels.push_back(label);
    }
    assign_stratified_splits(labels, ds.num_classes, ds.train_ids, ds.val_ids, ds.test_ids);
    return ds;
}

void normalize_per_channel(Dataset& ds) {
    if (ds.train_ids.empty()) throw std::invalid_argument("normalize_per_channel: empty train split");
    const int F = ds.channels;
    std::vector<double> mean(size_t(F), 0.0), var(size_t(F), 0.0);
    size_t count = 0;
    for (int id : ds.train_ids) {
        const Mat& m = ds.sequences[size_t(id)].features;
        for (int t = 0; t < m.rows; ++t)
            for (int f = 0; f < F; ++f) mean[size_t(f)] += m.at(t, f);
        count += size_t(m.rows);
    }
    for (double& v : mean) v /= double(count);
    for (int id : ds.train_ids) {
        const Mat& m = ds.sequences[size_t(id)].features;
        for (int t = 0; t < m.rows; ++t)
            for (int f = 0; f < F; ++f) {
                const double d = m.at(t, f) - mean[size_t(f)];
                var[size_t(f)] += d * d;
            }
    }
    for (double& v : var) v /= double(count);
    for (auto& fs : ds.sequences) {
        Mat& m = fs.features;
        for (int t = 0; t < m.rows; ++t)
            for (int f = 0; f < F; ++f)
                m.at(t, f) = (m.at(t, f) - mean[size_t(f)]) / std::sqrt(var[size_t(f)] + 1e-12);
    }
}

std::vector<std::vector<int>> batches(const Dataset& ds, Split split, const BatchPlan& plan) {
    const std::vector<int>& ids = ds.split_ids(split);
    if (ids.empty()) throw std::invalid_argument("batches: empty split");
    if (plan.batch_size < 1 || size_t(plan.batch_size) > ids.size())
        throw std::invalid_argument("batches: batch size must be in [1, split size]");
    std::vector<int> perm = ids;
    RngStream rng = derive_stream(plan.shuffle_seed, {0x6261746368ull /* "batch" */, uint64_t(plan.epoch)});
    for (size_t i = perm.size() - 1; i > 0; --i) {
        const size_t j = bounded(rng.next_u64(), i + 1);
        std::swap(perm[i], perm[j]);
    }
    std::vector<std::vector<int>> out;
    const size_t stride = size_t(plan.batch_size);
    for (size_t lo = 0; lo < perm.size(); lo += stride) {
        const size_t hi = std::min(perm.size(), lo + stride);
        out.emplace_back(perm.begin() + long(lo), perm.begin() + long(hi));
    }
    return out;
}

}  // namespace snnvi
