#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "serkit/nn/gemm.hpp"
#include "serkit/nn/tensor.hpp"

namespace serkit::nn {

// Bidirectional LSTM over batch x T x input tensors. One pass runs in time
// order, the other reversed; per-step outputs are concatenated, so the
// result is batch x T x 2*hidden. Gate order in the stacked weights is
// (input, forget, candidate, output).
template <class S>
class BiLstm {
 public:
  BiLstm(size_t input, size_t hidden, std::string name = "lstm")
      : in_(input), h_(hidden) {
    const char* dir_names[2] = {"fwd", "bwd"};
    for (int dir = 0; dir < 2; ++dir) {
      auto& d = dir_[dir];
      d.w_in.name = name + "." + dir_names[dir] + ".w_in";
      d.w_rec.name = name + "." + dir_names[dir] + ".w_rec";
      d.bias.name = name + "." + dir_names[dir] + ".bias";
      d.w_in.init_dims({4 * hidden, input});
      d.w_rec.init_dims({4 * hidden, hidden});
      d.bias.init_dims({4 * hidden});
    }
  }

  // Uniform +-sqrt(1/fan_in) weights; forget-gate bias 1, other biases 0.
  void init(Rng& rng) {
    for (int dir = 0; dir < 2; ++dir) {
      auto& d = dir_[dir];
      init_uniform_fan_in(d.w_in.value, in_, rng);
      init_uniform_fan_in(d.w_rec.value, h_, rng);
      d.bias.value.fill(S(0));
      for (size_t j = h_; j < 2 * h_; ++j) d.bias.value.at(j) = S(1);
    }
  }

  Tensor<S> forward(const Tensor<S>& x, const Context& = {}) {
    if (x.ndim() != 3 || x.dim(2) != in_) throw ShapeMismatch("BiLstm: input dims");
    x_ = x;
    const size_t n = x.dim(0), t_len = x.dim(1);
    if (t_len < 1) throw ShapeMismatch("BiLstm: empty sequence");

    Tensor<S> y({n, t_len, 2 * h_});
    for (int dir = 0; dir < 2; ++dir) run_direction(dir, x, y);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const size_t n = x_.dim(0), t_len = x_.dim(1);
    if (dy.dims != std::vector<size_t>{n, t_len, 2 * h_})
      throw ShapeMismatch("BiLstm: grad dims");

    Tensor<S> dx(x_.dims);
    for (int dir = 0; dir < 2; ++dir) backprop_direction(dir, dy, dx);
    return dx;
  }

  void collect_params(std::vector<Param<S>*>& out) {
    for (int dir = 0; dir < 2; ++dir) {
      out.push_back(&dir_[dir].w_in);
      out.push_back(&dir_[dir].w_rec);
      out.push_back(&dir_[dir].bias);
    }
  }

  size_t input_size() const { return in_; }
  size_t hidden_size() const { return h_; }
  Param<S>& w_in(int dir) { return dir_[dir].w_in; }
  Param<S>& w_rec(int dir) { return dir_[dir].w_rec; }
  Param<S>& bias(int dir) { return dir_[dir].bias; }

 private:
  struct Direction {
    Param<S> w_in, w_rec, bias;
    // Step caches, indexed by processing step (not absolute time).
    std::vector<S> gates;  // [T][N,4h] post-activation
    std::vector<S> c;      // [T][N,h]
    std::vector<S> tanh_c; // [T][N,h]
    std::vector<S> h;      // [T][N,h]
  };

  static double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  // step s processes absolute time t: forward scans 0..T-1, backward T-1..0.
  size_t abs_time(int dir, size_t s, size_t t_len) const {
    return dir == 0 ? s : t_len - 1 - s;
  }

  void run_direction(int dir, const Tensor<S>& x, Tensor<S>& y) {
    auto& d = dir_[dir];
    const size_t n = x.dim(0), t_len = x.dim(1);
    const size_t g4 = 4 * h_;

    // Input contribution for every step at once: [N*T, 4h] = x W^T + b.
    std::vector<S> xw(n * t_len * g4);
    for (size_t row = 0; row < n * t_len; ++row)
      std::copy(d.bias.value.v.begin(), d.bias.value.v.end(), xw.begin() + row * g4);
    gemm_nt(n * t_len, g4, in_, x.data(), d.w_in.value.data(), xw.data(), true);

    d.gates.assign(t_len * n * g4, S(0));
    d.c.assign(t_len * n * h_, S(0));
    d.tanh_c.assign(t_len * n * h_, S(0));
    d.h.assign(t_len * n * h_, S(0));

    std::vector<S> pre(n * g4);
    for (size_t s = 0; s < t_len; ++s) {
      const size_t t = abs_time(dir, s, t_len);
      for (size_t i = 0; i < n; ++i)
        std::copy(xw.begin() + (i * t_len + t) * g4, xw.begin() + (i * t_len + t + 1) * g4,
                  pre.begin() + i * g4);
      if (s > 0)
        gemm_nt(n, g4, h_, d.h.data() + (s - 1) * n * h_, d.w_rec.value.data(), pre.data(),
                true);

      S* gates = d.gates.data() + s * n * g4;
      S* c = d.c.data() + s * n * h_;
      S* tc = d.tanh_c.data() + s * n * h_;
      S* hh = d.h.data() + s * n * h_;
      const S* c_prev = s > 0 ? d.c.data() + (s - 1) * n * h_ : nullptr;
      for (size_t i = 0; i < n; ++i) {
        const S* p = pre.data() + i * g4;
        S* g = gates + i * g4;
        for (size_t j = 0; j < h_; ++j) {
          const double gi = sigmoid(static_cast<double>(p[j]));
          const double gf = sigmoid(static_cast<double>(p[h_ + j]));
          const double gg = std::tanh(static_cast<double>(p[2 * h_ + j]));
          const double go = sigmoid(static_cast<double>(p[3 * h_ + j]));
          g[j] = static_cast<S>(gi);
          g[h_ + j] = static_cast<S>(gf);
          g[2 * h_ + j] = static_cast<S>(gg);
          g[3 * h_ + j] = static_cast<S>(go);
          const double cp = c_prev ? static_cast<double>(c_prev[i * h_ + j]) : 0.0;
          const double cv = gf * cp + gi * gg;
          const double tv = std::tanh(cv);
          c[i * h_ + j] = static_cast<S>(cv);
          tc[i * h_ + j] = static_cast<S>(tv);
          hh[i * h_ + j] = static_cast<S>(go * tv);
          y.at3(i, t, dir * h_ + j) = hh[i * h_ + j];
        }
      }
    }
  }

  void backprop_direction(int dir, const Tensor<S>& dy, Tensor<S>& dx) {
    auto& d = dir_[dir];
    const size_t n = x_.dim(0), t_len = x_.dim(1);
    const size_t g4 = 4 * h_;

    // Pre-activation gate gradients for every (sample, absolute time) row,
    // so the input-weight gradients reduce to two large GEMMs at the end.
    std::vector<S> dgates_all(n * t_len * g4, S(0));
    std::vector<S> dgates(n * g4);
    std::vector<S> dh_next(n * h_, S(0));
    std::vector<S> dc_next(n * h_, S(0));

    for (size_t s = t_len; s-- > 0;) {
      const size_t t = abs_time(dir, s, t_len);
      const S* gates = d.gates.data() + s * n * g4;
      const S* tc = d.tanh_c.data() + s * n * h_;
      const S* c_prev = s > 0 ? d.c.data() + (s - 1) * n * h_ : nullptr;

      for (size_t i = 0; i < n; ++i) {
        const S* g = gates + i * g4;
        S* dg = dgates.data() + i * g4;
        for (size_t j = 0; j < h_; ++j) {
          const double gi = g[j], gf = g[h_ + j], gg = g[2 * h_ + j], go = g[3 * h_ + j];
          const double tv = tc[i * h_ + j];
          const double dh = static_cast<double>(dy.at3(i, t, dir * h_ + j)) +
                            static_cast<double>(dh_next[i * h_ + j]);
          const double dov = dh * tv;
          const double dc = static_cast<double>(dc_next[i * h_ + j]) +
                            dh * go * (1.0 - tv * tv);
          const double div = dc * gg;
          const double dgv = dc * gi;
          const double cp = c_prev ? static_cast<double>(c_prev[i * h_ + j]) : 0.0;
          const double dfv = dc * cp;
          dc_next[i * h_ + j] = static_cast<S>(dc * gf);
          dg[j] = static_cast<S>(div * gi * (1.0 - gi));
          dg[h_ + j] = static_cast<S>(dfv * gf * (1.0 - gf));
          dg[2 * h_ + j] = static_cast<S>(dgv * (1.0 - gg * gg));
          dg[3 * h_ + j] = static_cast<S>(dov * go * (1.0 - go));
        }
      }

      for (size_t i = 0; i < n; ++i)
        std::copy(dgates.begin() + i * g4, dgates.begin() + (i + 1) * g4,
                  dgates_all.begin() + (i * t_len + t) * g4);

      if (s > 0) {
        gemm_tn(g4, h_, n, dgates.data(), d.h.data() + (s - 1) * n * h_,
                d.w_rec.grad.data(), true);
        gemm_nn(n, h_, g4, dgates.data(), d.w_rec.value.data(), dh_next.data(), false);
      }
    }

    for (size_t row = 0; row < n * t_len; ++row)
      for (size_t j = 0; j < g4; ++j) d.bias.grad.at(j) += dgates_all[row * g4 + j];
    gemm_tn(g4, in_, n * t_len, dgates_all.data(), x_.data(), d.w_in.grad.data(), true);
    gemm_nn(n * t_len, in_, g4, dgates_all.data(), d.w_in.value.data(), dx.data(), true);
  }

  size_t in_, h_;
  Direction dir_[2];
  Tensor<S> x_;
};

}  // namespace serkit::nn
