#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace snnvi {

// Dense row-major matrix of doubles.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(size_t(r) * c, 0.0) {}

    double& at(int r, int c) { return a[size_t(r) * cols + c]; }
    double at(int r, int c) const { return a[size_t(r) * cols + c]; }
    double* row(int r) { return a.data() + size_t(r) * cols; }
    const double* row(int r) const { return a.data() + size_t(r) * cols; }
    void fill(double v) { std::fill(a.begin(), a.end(), v); }

    bool operator==(const Mat&) const = default;
};

// Worker-count control for parallel kernels. Results are bit-identical for
// any thread count: workers own disjoint output ranges and every reduction
// runs in fixed index order.
void set_num_threads(int n);
int num_threads();

// Runs fn(begin, end) over a contiguous partition of [0, n).
void parallel_for(int n, const std::function<void(int, int)>& fn);

// C[m x n] = A[m x k] * B[n x k]^T        (row dots; B rows are the k-vectors)
void matmul_nt(const Mat& A, const Mat& B, Mat& C);
// C[m x n] = A[m x k] * B[k x n]
void matmul_nn(const Mat& A, const Mat& B, Mat& C);
// C[n x k] += A[m x n]^T * B[m x k]       (gradient accumulation)
void matmul_tn_add(const Mat& A, const Mat& B, Mat& C);

}  // namespace snnvi
