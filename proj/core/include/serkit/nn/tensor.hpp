#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "serkit/errors.hpp"
#include "serkit/rng.hpp"
#include "serkit/tensor.hpp"

namespace serkit::nn {

enum class Mode { train, infer };

struct Context {
  Mode mode = Mode::infer;
  Rng* rng = nullptr;
};

// Dense row-major numeric array used inside the layer stack. Instantiated
// with float for training and with double for the reference checks.
template <class S>
struct Tensor {
  std::vector<size_t> dims;
  std::vector<S> v;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> d) : dims(std::move(d)) { v.assign(numel(), S(0)); }
  Tensor(std::initializer_list<size_t> d) : Tensor(std::vector<size_t>(d)) {}

  size_t numel() const {
    if (dims.empty()) return 0;
    size_t n = 1;
    for (size_t d : dims) n *= d;
    return n;
  }
  size_t dim(size_t i) const { return dims[i]; }
  size_t ndim() const { return dims.size(); }

  S* data() { return v.data(); }
  const S* data() const { return v.data(); }

  S& at(size_t i) { return v[i]; }
  S at(size_t i) const { return v[i]; }
  S& at2(size_t i, size_t j) { return v[i * dims[1] + j]; }
  S at2(size_t i, size_t j) const { return v[i * dims[1] + j]; }
  S& at3(size_t i, size_t j, size_t k) { return v[(i * dims[1] + j) * dims[2] + k]; }
  S at3(size_t i, size_t j, size_t k) const { return v[(i * dims[1] + j) * dims[2] + k]; }
  S& at4(size_t n, size_t c, size_t h, size_t w) {
    return v[((n * dims[1] + c) * dims[2] + h) * dims[3] + w];
  }
  S at4(size_t n, size_t c, size_t h, size_t w) const {
    return v[((n * dims[1] + c) * dims[2] + h) * dims[3] + w];
  }

  void fill(S x) { std::fill(v.begin(), v.end(), x); }
  void require_dims(std::initializer_list<size_t> want, const char* who) const {
    if (dims != std::vector<size_t>(want))
      throw ShapeMismatch(std::string(who) + ": unexpected tensor dims");
  }
  bool all_finite() const {
    for (S x : v)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }
};

template <class S>
struct Param {
  std::string name;
  Tensor<S> value;
  Tensor<S> grad;

  explicit Param(std::string n = "") : name(std::move(n)) {}
  void init_dims(std::vector<size_t> dims) {
    value = Tensor<S>(dims);
    grad = Tensor<S>(std::move(dims));
  }
  void zero_grad() { grad.fill(S(0)); }
};

// Uniform init over +-sqrt(1/fan_in); draws are doubles so float and double
// instantiations see the same stream.
template <class S>
void init_uniform_fan_in(Tensor<S>& t, size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (S& x : t.v) x = static_cast<S>(rng.uniform(-bound, bound));
}

template <class S>
FeatureTensor to_feature_tensor(const Tensor<S>& t) {
  FeatureTensor out;
  out.dims = t.dims;
  out.data.resize(t.v.size());
  for (size_t i = 0; i < t.v.size(); ++i) out.data[i] = static_cast<float>(t.v[i]);
  return out;
}

template <class S>
Tensor<S> from_feature_tensor(const FeatureTensor& t) {
  Tensor<S> out;
  out.dims = t.dims;
  out.v.resize(t.data.size());
  for (size_t i = 0; i < t.data.size(); ++i) out.v[i] = static_cast<S>(t.data[i]);
  return out;
}

}  // namespace serkit::nn
