#include "snnvi/tensor.hpp"

#include <chrono>
#include <cmath>

#include "doctest.h"
#include "snnvi/rng.hpp"

using namespace snnvi;

namespace {

Mat random_mat(int r, int c, RngStream& rng) {
    Mat m(r, c);
    for (auto& v : m.a) v = rng.next_uniform() - 0.5;
    return m;
}

Mat naive_nt(const Mat& A, const Mat& B) {
    Mat C(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < B.rows; ++j) {
            double s = 0.0;
            for (int k = 0; k < A.cols; ++k) s += A.at(i, k) * B.at(j, k);
            C.at(i, j) = s;
        }
    return C;
}

}  // namespace

TEST_CASE("matmul kernels agree with naive triple loops") {
    RngStream rng(11, 0);
    Mat A = random_mat(37, 19, rng);
    Mat B = random_mat(23, 19, rng);
    Mat C;
    matmul_nt(A, B, C);
    Mat ref = naive_nt(A, B);
    for (size_t i = 0; i < C.a.size(); ++i) CHECK(C.a[i] == doctest::Approx(ref.a[i]).epsilon(1e-12));

    // nn against nt with transposed operand
    Mat Bt(19, 23);
    for (int i = 0; i < 23; ++i)
        for (int k = 0; k < 19; ++k) Bt.at(k, i) = B.at(i, k);
    Mat C2;
    matmul_nn(A, Bt, C2);
    for (size_t i = 0; i < C2.a.size(); ++i) CHECK(C2.a[i] == doctest::Approx(ref.a[i]).epsilon(1e-12));

    // tn_add: C[n x k] += A^T B
    Mat G = random_mat(37, 23, rng);
    Mat D(23, 19);
    matmul_tn_add(G, A, D);
    for (int j = 0; j < 23; ++j)
        for (int k = 0; k < 19; ++k) {
            double s = 0.0;
            for (int r = 0; r < 37; ++r) s += G.at(r, j) * A.at(r, k);
            CHECK(D.at(j, k) == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("results identical for 1 and N threads") {
    RngStream rng(13, 0);
    Mat A = random_mat(200, 64, rng);
    Mat B = random_mat(48, 64, rng);
    int saved = num_threads();
    set_num_threads(1);
    Mat C1;
    matmul_nt(A, B, C1);
    set_num_threads(4);
    Mat C4;
    matmul_nt(A, B, C4);
    set_num_threads(saved);
    CHECK(C1.a == C4.a);
}

TEST_CASE("gemm throughput sanity" * doctest::skip(false)) {
    RngStream rng(17, 0);
    const int m = 1600, k = 128, n = 128;
    Mat A = random_mat(m, k, rng);
    Mat B = random_mat(n, k, rng);
    Mat C;
    matmul_nt(A, B, C);  // warm up
    auto t0 = std::chrono::steady_clock::now();
    const int reps = 10;
    for (int i = 0; i < reps; ++i) matmul_nt(A, B, C);
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double gflops = 2.0 * m * k * n * reps / dt / 1e9;
    MESSAGE("matmul_nt throughput: " << gflops << " GFLOP/s");
    CHECK(gflops > 0.2);
}
