#pragma once

#include <cstddef>

namespace serkit::nn {

// Row-major GEMM kernels used by every layer.
//
// The float overloads dispatch to BLAS. The double overloads accumulate each
// output strictly in ascending-k order, so their results are bit-identical
// to a plain loop computing the same sum; the reference oracles in the test
// suite rely on that.

// C[m x n] = A[m x k] * B[k x n], or += when accumulate.
void gemm_nn(size_t m, size_t n, size_t k, const float* a, const float* b, float* c,
             bool accumulate);
void gemm_nn(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
             bool accumulate);

// C[m x n] = A[m x k] * B[n x k]^T.
void gemm_nt(size_t m, size_t n, size_t k, const float* a, const float* b, float* c,
             bool accumulate);
void gemm_nt(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
             bool accumulate);

// C[m x n] = A[k x m]^T * B[k x n].
void gemm_tn(size_t m, size_t n, size_t k, const float* a, const float* b, float* c,
             bool accumulate);
void gemm_tn(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
             bool accumulate);

}  // namespace serkit::nn
