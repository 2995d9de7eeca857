#include "snnvi/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <thread>

namespace snnvi {

namespace {
int g_threads = []() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}();
thread_local bool t_inside_parallel = false;
}  // namespace

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int, int)>& fn) {
    const int nt = std::min(g_threads, n);
    // Nested calls run inline; one level of parallelism is enough.
    if (nt <= 1 || n < 64 || t_inside_parallel) {
        if (n > 0) fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const int chunk = (n + nt - 1) / nt;
    auto worker = [&fn](int lo, int hi) {
        t_inside_parallel = true;
        fn(lo, hi);
        t_inside_parallel = false;
    };
    for (int t = 0; t < nt; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
}

void matmul_nt(const Mat& A, const Mat& B, Mat& C) {
    if (A.cols != B.cols) throw std::invalid_argument("matmul_nt: inner dim mismatch");
    const int m = A.rows, n = B.rows, k = A.cols;
    C.rows = m;
    C.cols = n;
    C.a.assign(size_t(m) * n, 0.0);
    parallel_for(m, [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            const double* ar = A.row(r);
            double* cr = C.row(r);
            for (int j = 0; j < n; ++j) {
                const double* bj = B.row(j);
                double acc = 0.0;
                for (int x = 0; x < k; ++x) acc += ar[x] * bj[x];
                cr[j] = acc;
            }
        }
    });
}

void matmul_nn(const Mat& A, const Mat& B, Mat& C) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul_nn: inner dim mismatch");
    const int m = A.rows, k = A.cols, n = B.cols;
    C.rows = m;
    C.cols = n;
    C.a.assign(size_t(m) * n, 0.0);
    parallel_for(m, [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            const double* ar = A.row(r);
            double* cr = C.row(r);
            for (int x = 0; x < k; ++x) {
                const double coef = ar[x];
                if (coef == 0.0) continue;
                const double* bx = B.row(x);
                for (int j = 0; j < n; ++j) cr[j] += coef * bx[j];
            }
        }
    });
}

void matmul_tn_add(const Mat& A, const Mat& B, Mat& C) {
    if (A.rows != B.rows) throw std::invalid_argument("matmul_tn_add: outer dim mismatch");
    if (C.rows != A.cols || C.cols != B.cols)
        throw std::invalid_argument("matmul_tn_add: output shape mismatch");
    const int m = A.rows, n = A.cols, k = B.cols;
    // Each worker owns a row range of C and walks the m samples in order.
    parallel_for(n, [&](int jlo, int jhi) {
        for (int r = 0; r < m; ++r) {
            const double* ar = A.row(r);
            const double* br = B.row(r);
            for (int j = jlo; j < jhi; ++j) {
                const double coef = ar[j];
                if (coef == 0.0) continue;
                double* cj = C.row(j);
                for (int x = 0; x < k; ++x) cj[x] += coef * br[x];
            }
        }
    });
}

}  // namespace snnvi
