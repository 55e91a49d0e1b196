#pragma once

#include <cmath>
#include <vector>

#include "serkit/nn/tensor.hpp"

namespace serkit::nn {

template <class S>
std::vector<double> softmax_row(const S* logits, size_t n) {
  double m = -1e300;
  for (size_t i = 0; i < n; ++i) m = std::max(m, static_cast<double>(logits[i]));
  std::vector<double> p(n);
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - m);
    z += p[i];
  }
  for (size_t i = 0; i < n; ++i) p[i] /= z;
  return p;
}

template <class S>
struct LossResult {
  double loss = 0.0;
  Tensor<S> dlogits;
};

// Mean softmax cross entropy against (possibly soft) target distributions.
// Gradient is (softmax - target) / batch. Throws InvalidTarget when a row is
// not a probability vector within 1e-6.
template <class S>
LossResult<S> softmax_cross_entropy(const Tensor<S>& logits, const Tensor<S>& targets) {
  if (logits.ndim() != 2 || targets.dims != logits.dims)
    throw ShapeMismatch("softmax_cross_entropy: dims");
  const size_t n = logits.dim(0), classes = logits.dim(1);
  if (n == 0) throw ShapeMismatch("softmax_cross_entropy: empty batch");

  LossResult<S> res;
  res.dlogits = Tensor<S>(logits.dims);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (size_t c = 0; c < classes; ++c) {
      const double y = static_cast<double>(targets.at2(i, c));
      if (y < -1e-9 || !std::isfinite(y))
        throw InvalidTarget("target row " + std::to_string(i) + " has a bad entry");
      sum += y;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw InvalidTarget("target row " + std::to_string(i) + " sums to " +
                          std::to_string(sum));

    double m = -1e300;
    for (size_t c = 0; c < classes; ++c)
      m = std::max(m, static_cast<double>(logits.at2(i, c)));
    double z = 0.0;
    for (size_t c = 0; c < classes; ++c)
      z += std::exp(static_cast<double>(logits.at2(i, c)) - m);
    const double log_z = std::log(z);
    for (size_t c = 0; c < classes; ++c) {
      const double l = static_cast<double>(logits.at2(i, c));
      const double y = static_cast<double>(targets.at2(i, c));
      const double log_p = l - m - log_z;
      total -= y * log_p;
      res.dlogits.at2(i, c) =
          static_cast<S>((std::exp(log_p) - y) / static_cast<double>(n));
    }
  }
  res.loss = total / static_cast<double>(n);
  return res;
}

}  // namespace serkit::nn
