#pragma once

#include <span>
#include <vector>

namespace snnvi {

// Numerically stable softmax (max-shifted). Throws std::invalid_argument on
// empty or non-finite input.
std::vector<double> softmax(std::span<const double> logits);

// log(sum_s exp(v_s)) via max-shift.
double log_sum_exp(std::span<const double> values);

// log((1/S) * sum_s exp(v_s)) via max-shift.
double log_mean_exp(std::span<const double> values);

// Cross-entropy -log softmax(logits)[label], computed from logits directly.
double cross_entropy(std::span<const double> logits, int label);

// -sum p*ln(p) with 0*ln(0) = 0.
double entropy(std::span<const double> probs);

// Entries in [0,1] summing to 1 within tol.
bool is_prob_vector(std::span<const double> p, double tol = 1e-9);

}  // namespace snnvi
