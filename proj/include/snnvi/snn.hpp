#pragma once

#include <span>
#include <string>
#include <vector>

#include "snnvi/data.hpp"
#include "snnvi/rng.hpp"
#include "snnvi/tensor.hpp"

namespace snnvi {

struct LifLayerConfig {
    int n_in = 0;
    int n_out = 0;
    double alpha = 0.9;             // leak, strictly inside (0,1)
    double v_th = 1.0;              // firing threshold, > 0
    double dropout_p = 0.0;         // [0,1)
    double boxcar_halfwidth = 0.5;  // surrogate window half-width
    double boxcar_gain = 0.5;       // surrogate value inside the window

    void validate() const;
};

struct Architecture {
    int channels = 20;    // F, input feature channels
    int frames = 100;     // T, time steps per sequence
    int num_classes = 5;  // C
    LifLayerConfig layer1, layer2;
    double readout_dropout_p = 0.0;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    static Architecture make(int channels, int frames, int num_classes, int hidden1, int hidden2);
    int flat_dim() const;
    void validate() const;
    bool operator==(const Architecture&) const = default;
};

// Trainable parameters. Hidden linear layers carry no bias (BN beta covers
// the shift); the readout keeps one.
struct NetworkParams {
    Mat w1;  // n1 x F
    std::vector<double> bn1_gamma, bn1_beta;
    Mat w2;  // n2 x n1
    std::vector<double> bn2_gamma, bn2_beta;
    std::vector<double> bno_gamma, bno_beta;  // BN over the rate vector
    Mat w_out;  // C x n2
    std::vector<double> b_out;

    bool operator==(const NetworkParams&) const = default;
};

// Flat layout "flat-v1": w1 (row-major), bn1_gamma, bn1_beta, w2, bn2_gamma,
// bn2_beta, bno_gamma, bno_beta, w_out (row-major), b_out.
inline constexpr const char* kFlatLayoutVersion = "flat-v1";
std::vector<double> flatten(const NetworkParams& p);
NetworkParams unflatten(const Architecture& arch, std::span<const double> flat);

// Running statistics for the three BN sites. When frozen, they never change
// and every mode normalizes with them.
struct BatchNormState {
    std::vector<double> mean1, var1;        // n1
    std::vector<double> mean2, var2;        // n2
    std::vector<double> mean_out, var_out;  // n2
    bool frozen = false;

    bool operator==(const BatchNormState&) const = default;
};

struct Network {
    Architecture arch;
    NetworkParams params;
    BatchNormState bn;

    bool operator==(const Network&) const = default;
};

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, BN gamma=1/beta=0, b_out=0,
// running stats (0,1).
Network init_network(const Architecture& arch, const RngStream& rng);

// Train: batch-stat BN (running stats updated), dropout on, hard spikes.
// Eval:  running-stat BN, no dropout, hard spikes; pure function.
// Soft:  like Train but spikes replaced by the clipped-linear relaxation in
//        the forward pass and running stats left untouched; pure function.
//        Exists as the differentiable gradient oracle.
// A frozen BatchNormState forces the running-stat path in every mode.
enum class Mode { Train, Eval, Soft };

struct ForwardTrace {
    // Row b*T+t holds time step t of batch element b.
    Mat membranes1, spikes1, drive1;  // drive = BN output fed to the LIF update
    Mat membranes2, spikes2, drive2;
    Mat rate;    // B x n2, spike count / T (post-dropout spikes in train mode)
    Mat logits;  // B x C
    // statistics each BN site normalized with
    std::vector<double> bn1_mean, bn1_var, bn2_mean, bn2_var, bno_mean, bno_var;
};

using Batch = std::vector<const FeatureSequence*>;
Batch gather(const Dataset& ds, const std::vector<int>& ids);

// Returns logits (B x C). Dropout masks are a pure function of `rng`, so a
// fixed stream makes train/soft forwards reproducible.
Mat network_forward(Network& net, const Batch& batch, Mode mode, const RngStream& rng,
                    ForwardTrace* trace = nullptr);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // flat-v1 layout
};

// Mean cross-entropy over the batch and its gradient via backpropagation
// through time. Hard modes use the boxcar surrogate for dspike/du; soft mode
// uses the exact derivative of the clipped-linear relaxation.
LossGrad loss_and_gradients(Network& net, const Batch& batch, Mode mode, const RngStream& rng);

// Single-sequence LIF dynamics: u_t = alpha*u_{t-1} + drive_t - v_th*s_{t-1},
// s_t = 1[u_t >= v_th], u_0 = s_0 = 0. drive is T x n.
void lif_forward(const LifLayerConfig& cfg, const Mat& drive, Mat& spikes, Mat& membranes);

// boxcar_gain inside |u - v_th| <= boxcar_halfwidth (closed window), else 0.
double boxcar_surrogate(double u, const LifLayerConfig& cfg);

// Inverted-dropout scale factors (0 or 1/(1-p)); entry (r,j) is a pure
// function of (stream, r*cols+j).
Mat dropout_mask(int rows, int cols, double p, const RngStream& stream);

}  // namespace snnvi
