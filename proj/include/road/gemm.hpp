#pragma once

#include <cstdint>
#include <vector>

namespace road::detail {

// Row-major kernels in saxpy loop order (unit stride on the inner index) so
// the compiler vectorizes them. noinline keeps one code path per kernel:
// per-row results are then bitwise identical for any batch split.

/// C[M,N] += A[M,K] * B[K,N]
template <typename Real>
[[gnu::noinline]] void gemm_nn(std::int64_t M, std::int64_t N, std::int64_t K,
                               const Real* A, const Real* B, Real* C) {
    for (std::int64_t i = 0; i < M; ++i) {
        const Real* a = A + i * K;
        Real* c = C + i * N;
        for (std::int64_t k = 0; k < K; ++k) {
            const Real av = a[k];
            const Real* b = B + k * N;
            for (std::int64_t j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

/// C[M,K] += A[M,N] * B^T where B is [K,N]; B is transposed into scratch first.
template <typename Real>
[[gnu::noinline]] void gemm_nt(std::int64_t M, std::int64_t K, std::int64_t N,
                               const Real* A, const Real* B, Real* C,
                               std::vector<Real>& scratch) {
    scratch.resize(std::size_t(N * K));
    Real* bt = scratch.data();
    for (std::int64_t k = 0; k < K; ++k)
        for (std::int64_t j = 0; j < N; ++j) bt[j * K + k] = B[k * N + j];
    gemm_nn(M, K, N, A, bt, C);
}

/// C[K,N] += A^T * B where A is [M,K], B is [M,N]
template <typename Real>
[[gnu::noinline]] void gemm_tn(std::int64_t K, std::int64_t N, std::int64_t M,
                               const Real* A, const Real* B, Real* C) {
    for (std::int64_t i = 0; i < M; ++i) {
        const Real* a = A + i * K;
        const Real* b = B + i * N;
        for (std::int64_t k = 0; k < K; ++k) {
            const Real av = a[k];
            Real* c = C + k * N;
            for (std::int64_t j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

} // namespace road::detail
