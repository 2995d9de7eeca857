#pragma once

#include <string>
#include <vector>

#include "snnvi/rng.hpp"
#include "snnvi/tensor.hpp"

namespace snnvi {

// One labelled sequence: T x F feature matrix (frames x channels).
struct FeatureSequence {
    Mat features;
    int label = 0;

    bool operator==(const FeatureSequence&) const = default;
};

enum class Split { Train, Val, Test };

struct Dataset {
    std::vector<FeatureSequence> sequences;
    int num_classes = 0;
    int frames = 0;    // T
    int channels = 0;  // F
    std::vector<int> train_ids, val_ids, test_ids;

    const std::vector<int>& split_ids(Split s) const {
        switch (s) {
            case Split::Train: return train_ids;
            case Split::Val: return val_ids;
            default: return test_ids;
        }
    }
    bool operator==(const Dataset&) const = default;
};

// Deterministic minibatch schedule: the permutation of a split is a pure
// function of (shuffle_seed, epoch).
struct BatchPlan {
    uint64_t shuffle_seed = 0;
    int batch_size = 32;
    int epoch = 0;
};

// Synthetic sequence-classification data. Class k's template is a pair of
// sinusoids on two channel groups: group A (first F/2 channels) carries an
// integer-cycle tone at (k+1)/T cycles per frame with a class phase; group B
// carries a half-integer-cycle tone at (k+0.5)/T cycles per frame, whose
// window average cot(pi*(k+0.5)/T)/T is nonzero and strictly decreasing in k,
// so time-averaged signatures are pairwise distinct. Examples add i.i.d.
// Gaussian noise. Splits are 70/10/20 stratified per class.
Dataset gen_synthetic(int num_classes, int per_class, int frames, int channels,
                      double noise_std, const RngStream& seed);

// Noise-free class template, exposed for the nearest-template oracle.
Mat synthetic_template(int cls, int num_classes, int frames, int channels);

// Stratified 70/10/20 per-class split over `labels` in sequence order.
// Classes with fewer than 5 members lose their val share first, then test;
// every class keeps at least one training example.
void assign_stratified_splits(const std::vector<int>& labels, int num_classes,
                              std::vector<int>& train_ids, std::vector<int>& val_ids,
                              std::vector<int>& test_ids);

// SNNFEAT v1 text format: "SNNFEAT v1 N T F C" header, then one line per
// record: "label v_1 ... v_{T*F}" in frame-major order. Values are written
// with shortest round-trip precision, so save/load is lossless.
void save_features(const Dataset& ds, const std::string& path);
Dataset load_features(const std::string& path);

// Per-channel z-scoring with statistics from the train split only.
void normalize_per_channel(Dataset& ds);

// Shuffled index batches of one split; ceil(N/B) chunks, last may be short.
std::vector<std::vector<int>> batches(const Dataset& ds, Split split, const BatchPlan& plan);

}  // namespace snnvi
