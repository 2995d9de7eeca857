#include "snnvi/mathutil.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snnvi {

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (double z : logits) {
        if (std::isnan(z)) throw std::invalid_argument("softmax: NaN input");
        m = std::max(m, z);
    }
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - m);
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (std::isnan(v)) throw std::invalid_argument("log_sum_exp: NaN input");
        m = std::max(m, v);
    }
    if (std::isinf(m)) return m;  // all -inf
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - m);
    return m + std::log(sum);
}

double log_mean_exp(std::span<const double> values) {
    return log_sum_exp(values) - std::log(double(values.size()));
}

double cross_entropy(std::span<const double> logits, int label) {
    if (label < 0 || size_t(label) >= logits.size())
        throw std::invalid_argument("cross_entropy: label out of range");
    return log_sum_exp(logits) - logits[label];
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

bool is_prob_vector(std::span<const double> p, double tol) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

}  // namespace snnvi
