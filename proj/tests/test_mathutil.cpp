#include "snnvi/mathutil.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "snnvi/rng.hpp"

using namespace snnvi;

TEST_CASE("softmax symmetry and analytic values") {
    auto p = softmax(std::vector<double>{0.0, 0.0});
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

    auto q = softmax(std::vector<double>{std::log(2.0), 0.0});
    CHECK(q[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax shifted logits do not overflow") {
    auto p = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(std::abs(p[0] - 1.0) < 1e-12);
    CHECK(std::abs(p[1]) < 1e-12);
    CHECK(std::isfinite(p[0]));
}

TEST_CASE("softmax shift invariance property") {
    RngStream rng(31, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(5), zs(5);
        const double c = 50.0 * (rng.next_uniform() - 0.5);
        for (int k = 0; k < 5; ++k) {
            z[k] = 10.0 * (rng.next_uniform() - 0.5);
            zs[k] = z[k] + c;
        }
        auto p = softmax(z), q = softmax(zs);
        for (int k = 0; k < 5; ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-12);
    }
}

TEST_CASE("softmax rejects NaN") {
    std::vector<double> z{0.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(softmax(z), std::invalid_argument);
    CHECK_THROWS_AS(softmax(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("log_mean_exp constant and analytic cases") {
    CHECK(log_mean_exp(std::vector<double>{1.7, 1.7, 1.7}) == doctest::Approx(1.7).epsilon(1e-12));
    // one mass point and one ~zero probability
    CHECK(log_mean_exp(std::vector<double>{0.0, -745.0}) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-9));
    CHECK(log_mean_exp(std::vector<double>{std::log(0.2), std::log(0.4)}) ==
          doctest::Approx(std::log(0.3)).epsilon(1e-12));
}

TEST_CASE("cross_entropy matches -log softmax") {
    std::vector<double> z{0.3, -1.2, 2.0};
    auto p = softmax(z);
    for (int y = 0; y < 3; ++y)
        CHECK(cross_entropy(z, y) == doctest::Approx(-std::log(p[size_t(y)])).epsilon(1e-12));
    CHECK_THROWS_AS(cross_entropy(z, 3), std::invalid_argument);
}

TEST_CASE("entropy basics") {
    CHECK(entropy(std::vector<double>{1.0, 0.0}) == 0.0);
    CHECK(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("is_prob_vector") {
    CHECK(is_prob_vector(std::vector<double>{0.5, 0.5}));
    CHECK_FALSE(is_prob_vector(std::vector<double>{0.7, 0.4}));
    CHECK_FALSE(is_prob_vector(std::vector<double>{-0.1, 1.1}));
}
