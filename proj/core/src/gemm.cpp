#include "serkit/nn/gemm.hpp"

#include <cblas.h>

#include <cstring>

namespace serkit::nn {

namespace {

inline int ci(size_t v) { return static_cast<int>(v); }

}  // namespace

void gemm_nn(size_t m, size_t n, size_t k, const float* a, const float* b, float* c,
             bool accumulate) {
  cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, ci(m), ci(n), ci(k), 1.0f, a,
              ci(k), b, ci(n), accumulate ? 1.0f : 0.0f, c, ci(n));
}

void gemm_nt(size_t m, size_t n, size_t k, const float* a, const float* b, float* c,
             bool accumulate) {
  cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, ci(m), ci(n), ci(k), 1.0f, a,
              ci(k), b, ci(k), accumulate ? 1.0f : 0.0f, c, ci(n));
}

void gemm_tn(size_t m, size_t n, size_t k, const float* a, const float* b, float* c,
             bool accumulate) {
  cblas_sgemm(CblasRowMajor, CblasTrans, CblasNoTrans, ci(m), ci(n), ci(k), 1.0f, a,
              ci(m), b, ci(n), accumulate ? 1.0f : 0.0f, c, ci(n));
}

void gemm_nn(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci_row = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double av = ai[kk];
      const double* bk = b + kk * n;
      for (size_t j = 0; j < n; ++j) ci_row[j] += av * bk[j];
    }
  }
}

void gemm_nt(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (size_t kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
      double* out = c + i * n + j;
      *out = accumulate ? *out + acc : acc;
    }
  }
}

void gemm_tn(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
  for (size_t kk = 0; kk < k; ++kk) {
    const double* ak = a + kk * m;
    const double* bk = b + kk * n;
    for (size_t i = 0; i < m; ++i) {
      const double av = ak[i];
      double* ci_row = c + i * n;
      for (size_t j = 0; j < n; ++j) ci_row[j] += av * bk[j];
    }
  }
}

}  // namespace serkit::nn
