#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "serkit/nn/gemm.hpp"
#include "serkit/nn/tensor.hpp"

namespace serkit::nn {

// y = x W^T + b over a batch. Gradients accumulate into the params; the
// trainer zeroes them at batch start.
template <class S>
class Dense {
 public:
  Dense(size_t in, size_t out, std::string name = "dense") : in_(in), out_(out) {
    weight_.name = name + ".weight";
    bias_.name = name + ".bias";
    weight_.init_dims({out, in});
    bias_.init_dims({out});
  }

  void init(Rng& rng) {
    init_uniform_fan_in(weight_.value, in_, rng);
    bias_.value.fill(S(0));
  }

  Tensor<S> forward(const Tensor<S>& x, const Context& = {}) {
    if (x.ndim() != 2 || x.dim(1) != in_) throw ShapeMismatch("Dense: input dims");
    x_ = x;
    const size_t n = x.dim(0);
    Tensor<S> y({n, out_});
    for (size_t i = 0; i < n; ++i)
      std::copy(bias_.value.v.begin(), bias_.value.v.end(), y.v.begin() + i * out_);
    gemm_nt(n, out_, in_, x.data(), weight_.value.data(), y.data(), true);
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (dy.ndim() != 2 || dy.dim(0) != x_.dim(0) || dy.dim(1) != out_)
      throw ShapeMismatch("Dense: grad dims");
    const size_t n = dy.dim(0);
    gemm_tn(out_, in_, n, dy.data(), x_.data(), weight_.grad.data(), true);
    for (size_t i = 0; i < n; ++i)
      for (size_t o = 0; o < out_; ++o) bias_.grad.at(o) += dy.at2(i, o);
    Tensor<S> dx({n, in_});
    gemm_nn(n, in_, out_, dy.data(), weight_.value.data(), dx.data(), false);
    return dx;
  }

  void collect_params(std::vector<Param<S>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Param<S>& weight() { return weight_; }
  Param<S>& bias() { return bias_; }
  size_t in_features() const { return in_; }
  size_t out_features() const { return out_; }

 private:
  size_t in_, out_;
  Param<S> weight_, bias_;
  Tensor<S> x_;
};

// 2-d cross-correlation over NCHW tensors, im2col + GEMM.
template <class S>
class Conv2d {
 public:
  Conv2d(size_t in_ch, size_t out_ch, size_t kernel, size_t stride, size_t pad,
         bool has_bias = true, std::string name = "conv")
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad),
        has_bias_(has_bias) {
    weight_.name = name + ".weight";
    weight_.init_dims({out_ch, in_ch * kernel * kernel});
    if (has_bias_) {
      bias_.name = name + ".bias";
      bias_.init_dims({out_ch});
    }
  }

  void init(Rng& rng) {
    init_uniform_fan_in(weight_.value, in_ch_ * k_ * k_, rng);
    if (has_bias_) bias_.value.fill(S(0));
  }

  size_t out_size(size_t in) const {
    if (in + 2 * pad_ < k_ || (in + 2 * pad_ - k_) % stride_ != 0)
      throw ShapeMismatch("Conv2d: (H + 2p - k) not divisible by stride");
    return (in + 2 * pad_ - k_) / stride_ + 1;
  }

  Tensor<S> forward(const Tensor<S>& x, const Context& = {}) {
    if (x.ndim() != 4 || x.dim(1) != in_ch_) throw ShapeMismatch("Conv2d: input dims");
    x_ = x;
    const size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const size_t oh = out_size(h), ow = out_size(w);
    const size_t patch = in_ch_ * k_ * k_, positions = oh * ow;

    Tensor<S> y({n, out_ch_, oh, ow});
    std::vector<S> cols(patch * positions);
    for (size_t i = 0; i < n; ++i) {
      im2col(x, i, h, w, oh, ow, cols.data());
      gemm_nn(out_ch_, positions, patch, weight_.value.data(), cols.data(),
              y.data() + i * out_ch_ * positions, false);
      if (has_bias_) {
        S* yi = y.data() + i * out_ch_ * positions;
        for (size_t c = 0; c < out_ch_; ++c)
          for (size_t p = 0; p < positions; ++p) yi[c * positions + p] += bias_.value.at(c);
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const size_t n = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
    const size_t oh = out_size(h), ow = out_size(w);
    if (dy.dims != std::vector<size_t>{n, out_ch_, oh, ow})
      throw ShapeMismatch("Conv2d: grad dims");
    const size_t patch = in_ch_ * k_ * k_, positions = oh * ow;

    Tensor<S> dx({n, in_ch_, h, w});
    std::vector<S> cols(patch * positions);
    std::vector<S> dcols(patch * positions);
    for (size_t i = 0; i < n; ++i) {
      const S* dyi = dy.data() + i * out_ch_ * positions;
      im2col(x_, i, h, w, oh, ow, cols.data());
      gemm_nt(out_ch_, patch, positions, dyi, cols.data(), weight_.grad.data(), true);
      gemm_tn(patch, positions, out_ch_, weight_.value.data(), dyi, dcols.data(), false);
      col2im(dcols.data(), i, h, w, oh, ow, dx);
      if (has_bias_)
        for (size_t c = 0; c < out_ch_; ++c)
          for (size_t p = 0; p < positions; ++p) bias_.grad.at(c) += dyi[c * positions + p];
    }
    return dx;
  }

  void collect_params(std::vector<Param<S>*>& out) {
    out.push_back(&weight_);
    if (has_bias_) out.push_back(&bias_);
  }

  Param<S>& weight() { return weight_; }
  Param<S>& bias() { return bias_; }

 private:
  // cols is [in_ch*k*k, oh*ow]; patch index runs over (c, kh, kw) so GEMM
  // accumulation order matches a direct summation in the same order.
  void im2col(const Tensor<S>& x, size_t i, size_t h, size_t w, size_t oh, size_t ow,
              S* cols) const {
    const size_t positions = oh * ow;
    size_t row = 0;
    for (size_t c = 0; c < in_ch_; ++c) {
      const S* xc = x.data() + (i * in_ch_ + c) * h * w;
      for (size_t kh = 0; kh < k_; ++kh) {
        for (size_t kw = 0; kw < k_; ++kw, ++row) {
          S* dst = cols + row * positions;
          for (size_t r = 0; r < oh; ++r) {
            const ptrdiff_t sr = static_cast<ptrdiff_t>(r * stride_ + kh) -
                                 static_cast<ptrdiff_t>(pad_);
            for (size_t q = 0; q < ow; ++q) {
              const ptrdiff_t sc = static_cast<ptrdiff_t>(q * stride_ + kw) -
                                   static_cast<ptrdiff_t>(pad_);
              const bool in_bounds = sr >= 0 && sr < static_cast<ptrdiff_t>(h) &&
                                     sc >= 0 && sc < static_cast<ptrdiff_t>(w);
              dst[r * ow + q] = in_bounds ? xc[sr * w + sc] : S(0);
            }
          }
        }
      }
    }
  }

  void col2im(const S* dcols, size_t i, size_t h, size_t w, size_t oh, size_t ow,
              Tensor<S>& dx) const {
    const size_t positions = oh * ow;
    size_t row = 0;
    for (size_t c = 0; c < in_ch_; ++c) {
      S* xc = dx.data() + (i * in_ch_ + c) * h * w;
      for (size_t kh = 0; kh < k_; ++kh) {
        for (size_t kw = 0; kw < k_; ++kw, ++row) {
          const S* src = dcols + row * positions;
          for (size_t r = 0; r < oh; ++r) {
            const ptrdiff_t sr = static_cast<ptrdiff_t>(r * stride_ + kh) -
                                 static_cast<ptrdiff_t>(pad_);
            if (sr < 0 || sr >= static_cast<ptrdiff_t>(h)) continue;
            for (size_t q = 0; q < ow; ++q) {
              const ptrdiff_t sc = static_cast<ptrdiff_t>(q * stride_ + kw) -
                                   static_cast<ptrdiff_t>(pad_);
              if (sc < 0 || sc >= static_cast<ptrdiff_t>(w)) continue;
              xc[sr * w + sc] += src[r * ow + q];
            }
          }
        }
      }
    }
  }

  size_t in_ch_, out_ch_, k_, stride_, pad_;
  bool has_bias_;
  Param<S> weight_, bias_;
  Tensor<S> x_;
};

// Per-channel batch normalization over NCHW. Training mode uses batch
// statistics and updates the running estimates with the given momentum;
// inference mode uses the running estimates.
template <class S>
class BatchNorm2d {
 public:
  explicit BatchNorm2d(size_t channels, std::string name = "bn", double eps = 1e-5,
                       double momentum = 0.1)
      : ch_(channels), eps_(eps), momentum_(momentum) {
    gamma_.name = name + ".gamma";
    beta_.name = name + ".beta";
    gamma_.init_dims({channels});
    beta_.init_dims({channels});
    gamma_.value.fill(S(1));
    running_mean_ = Tensor<S>({channels});
    running_var_ = Tensor<S>({channels});
    running_var_.fill(S(1));
  }

  Tensor<S> forward(const Tensor<S>& x, const Context& ctx) {
    if (x.ndim() != 4 || x.dim(1) != ch_) throw ShapeMismatch("BatchNorm2d: input dims");
    const size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const size_t plane = h * w;
    const double m = static_cast<double>(n * plane);
    training_ = ctx.mode == Mode::train;
    if (training_ && n < 2)
      throw DegenerateBatch("batch size " + std::to_string(n) + " in training mode");

    Tensor<S> y(x.dims);
    if (training_) {
      xhat_ = Tensor<S>(x.dims);
      inv_std_.assign(ch_, 0.0);
      for (size_t c = 0; c < ch_; ++c) {
        double sum = 0.0, sq = 0.0;
        for (size_t i = 0; i < n; ++i) {
          const S* xs = x.data() + (i * ch_ + c) * plane;
          for (size_t p = 0; p < plane; ++p) {
            sum += static_cast<double>(xs[p]);
            sq += static_cast<double>(xs[p]) * static_cast<double>(xs[p]);
          }
        }
        const double mean = sum / m;
        const double var = std::max(sq / m - mean * mean, 0.0);
        const double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = inv;
        const double g = static_cast<double>(gamma_.value.at(c));
        const double bt = static_cast<double>(beta_.value.at(c));
        for (size_t i = 0; i < n; ++i) {
          const S* xs = x.data() + (i * ch_ + c) * plane;
          S* xh = xhat_.data() + (i * ch_ + c) * plane;
          S* ys = y.data() + (i * ch_ + c) * plane;
          for (size_t p = 0; p < plane; ++p) {
            const double v = (static_cast<double>(xs[p]) - mean) * inv;
            xh[p] = static_cast<S>(v);
            ys[p] = static_cast<S>(g * v + bt);
          }
        }
        // Unbiased variance for the running estimate.
        const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
        running_mean_.at(c) =
            static_cast<S>((1.0 - momentum_) * running_mean_.at(c) + momentum_ * mean);
        running_var_.at(c) =
            static_cast<S>((1.0 - momentum_) * running_var_.at(c) + momentum_ * unbiased);
      }
    } else {
      for (size_t c = 0; c < ch_; ++c) {
        const double mean = static_cast<double>(running_mean_.at(c));
        const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_.at(c)) + eps_);
        const double g = static_cast<double>(gamma_.value.at(c));
        const double bt = static_cast<double>(beta_.value.at(c));
        for (size_t i = 0; i < n; ++i) {
          const S* xs = x.data() + (i * ch_ + c) * plane;
          S* ys = y.data() + (i * ch_ + c) * plane;
          for (size_t p = 0; p < plane; ++p)
            ys[p] = static_cast<S>(g * (static_cast<double>(xs[p]) - mean) * inv + bt);
        }
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (!training_) throw ShapeMismatch("BatchNorm2d: backward outside training mode");
    if (dy.dims != xhat_.dims) throw ShapeMismatch("BatchNorm2d: grad dims");
    const size_t n = dy.dim(0), h = dy.dim(2), w = dy.dim(3);
    const size_t plane = h * w;
    const double m = static_cast<double>(n * plane);

    Tensor<S> dx(dy.dims);
    for (size_t c = 0; c < ch_; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const S* ds = dy.data() + (i * ch_ + c) * plane;
        const S* xh = xhat_.data() + (i * ch_ + c) * plane;
        for (size_t p = 0; p < plane; ++p) {
          sum_dy += static_cast<double>(ds[p]);
          sum_dy_xhat += static_cast<double>(ds[p]) * static_cast<double>(xh[p]);
        }
      }
      gamma_.grad.at(c) += static_cast<S>(sum_dy_xhat);
      beta_.grad.at(c) += static_cast<S>(sum_dy);

      const double g = static_cast<double>(gamma_.value.at(c));
      const double scale = g * inv_std_[c] / m;
      for (size_t i = 0; i < n; ++i) {
        const S* ds = dy.data() + (i * ch_ + c) * plane;
        const S* xh = xhat_.data() + (i * ch_ + c) * plane;
        S* dxs = dx.data() + (i * ch_ + c) * plane;
        for (size_t p = 0; p < plane; ++p)
          dxs[p] = static_cast<S>(scale * (m * static_cast<double>(ds[p]) - sum_dy -
                                           static_cast<double>(xh[p]) * sum_dy_xhat));
      }
    }
    return dx;
  }

  void collect_params(std::vector<Param<S>*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  Param<S>& gamma() { return gamma_; }
  Param<S>& beta() { return beta_; }
  Tensor<S>& running_mean() { return running_mean_; }
  Tensor<S>& running_var() { return running_var_; }

 private:
  size_t ch_;
  double eps_, momentum_;
  Param<S> gamma_, beta_;
  Tensor<S> running_mean_, running_var_;
  Tensor<S> xhat_;
  std::vector<double> inv_std_;
  bool training_ = false;
};

template <class S>
class Relu {
 public:
  Tensor<S> forward(const Tensor<S>& x, const Context& = {}) {
    mask_.assign(x.v.size(), 0);
    Tensor<S> y(x.dims);
    for (size_t i = 0; i < x.v.size(); ++i) {
      if (x.v[i] > S(0)) {
        y.v[i] = x.v[i];
        mask_[i] = 1;
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (dy.v.size() != mask_.size()) throw ShapeMismatch("Relu: grad dims");
    Tensor<S> dx(dy.dims);
    for (size_t i = 0; i < dy.v.size(); ++i) dx.v[i] = mask_[i] ? dy.v[i] : S(0);
    return dx;
  }

 private:
  std::vector<uint8_t> mask_;
};

template <class S>
class MaxPool2d {
 public:
  MaxPool2d(size_t kernel, size_t stride, size_t pad) : k_(kernel), stride_(stride), pad_(pad) {}

  Tensor<S> forward(const Tensor<S>& x, const Context& = {}) {
    if (x.ndim() != 4) throw ShapeMismatch("MaxPool2d: input dims");
    const size_t n = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
    const size_t oh = (h + 2 * pad_ - k_) / stride_ + 1;
    const size_t ow = (w + 2 * pad_ - k_) / stride_ + 1;
    in_dims_ = x.dims;

    Tensor<S> y({n, ch, oh, ow});
    argmax_.assign(y.numel(), 0);
    size_t out_i = 0;
    for (size_t i = 0; i < n; ++i)
      for (size_t c = 0; c < ch; ++c) {
        const S* xs = x.data() + (i * ch + c) * h * w;
        for (size_t r = 0; r < oh; ++r)
          for (size_t q = 0; q < ow; ++q, ++out_i) {
            S best = std::numeric_limits<S>::lowest();
            size_t best_idx = 0;
            for (size_t kh = 0; kh < k_; ++kh) {
              const ptrdiff_t sr = static_cast<ptrdiff_t>(r * stride_ + kh) -
                                   static_cast<ptrdiff_t>(pad_);
              if (sr < 0 || sr >= static_cast<ptrdiff_t>(h)) continue;
              for (size_t kw = 0; kw < k_; ++kw) {
                const ptrdiff_t sc = static_cast<ptrdiff_t>(q * stride_ + kw) -
                                     static_cast<ptrdiff_t>(pad_);
                if (sc < 0 || sc >= static_cast<ptrdiff_t>(w)) continue;
                const size_t idx = static_cast<size_t>(sr) * w + static_cast<size_t>(sc);
                if (xs[idx] > best) {
                  best = xs[idx];
                  best_idx = idx;
                }
              }
            }
            y.v[out_i] = best;
            argmax_[out_i] = (i * ch + c) * h * w + best_idx;
          }
      }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (dy.v.size() != argmax_.size()) throw ShapeMismatch("MaxPool2d: grad dims");
    Tensor<S> dx(in_dims_);
    for (size_t i = 0; i < dy.v.size(); ++i) dx.v[argmax_[i]] += dy.v[i];
    return dx;
  }

 private:
  size_t k_, stride_, pad_;
  std::vector<size_t> in_dims_;
  std::vector<size_t> argmax_;
};

template <class S>
class GlobalAvgPool {
 public:
  Tensor<S> forward(const Tensor<S>& x, const Context& = {}) {
    if (x.ndim() != 4) throw ShapeMismatch("GlobalAvgPool: input dims");
    in_dims_ = x.dims;
    const size_t n = x.dim(0), ch = x.dim(1), plane = x.dim(2) * x.dim(3);
    Tensor<S> y({n, ch});
    for (size_t i = 0; i < n; ++i)
      for (size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        const S* xs = x.data() + (i * ch + c) * plane;
        for (size_t p = 0; p < plane; ++p) acc += static_cast<double>(xs[p]);
        y.at2(i, c) = static_cast<S>(acc / static_cast<double>(plane));
      }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const size_t n = in_dims_[0], ch = in_dims_[1], plane = in_dims_[2] * in_dims_[3];
    if (dy.dims != std::vector<size_t>{n, ch}) throw ShapeMismatch("GlobalAvgPool: grad dims");
    Tensor<S> dx(in_dims_);
    for (size_t i = 0; i < n; ++i)
      for (size_t c = 0; c < ch; ++c) {
        const S g = static_cast<S>(static_cast<double>(dy.at2(i, c)) / plane);
        S* dxs = dx.data() + (i * ch + c) * plane;
        for (size_t p = 0; p < plane; ++p) dxs[p] = g;
      }
    return dx;
  }

 private:
  std::vector<size_t> in_dims_;
};

// Inverted dropout: zero with probability p in training and scale survivors
// by 1/(1-p); identity at inference.
template <class S>
class Dropout {
 public:
  explicit Dropout(double p) : p_(p) {
    if (p < 0.0 || p >= 1.0) throw ShapeMismatch("Dropout: need 0 <= p < 1");
  }

  Tensor<S> forward(const Tensor<S>& x, const Context& ctx) {
    if (ctx.mode != Mode::train || p_ == 0.0) {
      passthrough_ = true;
      return x;
    }
    if (ctx.rng == nullptr) throw ShapeMismatch("Dropout: training mode needs an rng");
    passthrough_ = false;
    const S scale = static_cast<S>(1.0 / (1.0 - p_));
    scale_.assign(x.v.size(), S(0));
    Tensor<S> y(x.dims);
    for (size_t i = 0; i < x.v.size(); ++i) {
      if (ctx.rng->uniform01() >= p_) {
        scale_[i] = scale;
        y.v[i] = x.v[i] * scale;
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (passthrough_) return dy;
    if (dy.v.size() != scale_.size()) throw ShapeMismatch("Dropout: grad dims");
    Tensor<S> dx(dy.dims);
    for (size_t i = 0; i < dy.v.size(); ++i) dx.v[i] = dy.v[i] * scale_[i];
    return dx;
  }

  double p() const { return p_; }

 private:
  double p_;
  bool passthrough_ = true;
  std::vector<S> scale_;
};

// Two 3x3 convolutions with batch norm and an identity or projected
// shortcut: y = relu(bn2(conv2(relu(bn1(conv1(x))))) + shortcut(x)).
template <class S>
class ResidualBlock {
 public:
  ResidualBlock(size_t in_ch, size_t out_ch, size_t stride, std::string name = "block")
      : conv1_(in_ch, out_ch, 3, stride, 1, false, name + ".conv1"),
        bn1_(out_ch, name + ".bn1"),
        conv2_(out_ch, out_ch, 3, 1, 1, false, name + ".conv2"),
        bn2_(out_ch, name + ".bn2"),
        projected_(stride != 1 || in_ch != out_ch) {
    if (projected_) {
      proj_conv_ = std::make_unique<Conv2d<S>>(in_ch, out_ch, 1, stride, 0, false,
                                               name + ".downsample.conv");
      proj_bn_ = std::make_unique<BatchNorm2d<S>>(out_ch, name + ".downsample.bn");
    }
  }

  void init(Rng& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
    if (projected_) proj_conv_->init(rng);
  }

  Tensor<S> forward(const Tensor<S>& x, const Context& ctx) {
    Tensor<S> main = bn2_.forward(conv2_.forward(relu1_.forward(bn1_.forward(
                                      conv1_.forward(x, ctx), ctx), ctx), ctx), ctx);
    Tensor<S> sc = projected_ ? proj_bn_->forward(proj_conv_->forward(x, ctx), ctx) : x;
    if (main.dims != sc.dims) throw ShapeMismatch("ResidualBlock: shortcut dims");
    for (size_t i = 0; i < main.v.size(); ++i) main.v[i] += sc.v[i];
    return relu_out_.forward(main, ctx);
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dsum = relu_out_.backward(dy);
    Tensor<S> dx = conv1_.backward(
        bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(dsum)))));
    if (projected_) {
      Tensor<S> dsc = proj_conv_->backward(proj_bn_->backward(dsum));
      for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dsc.v[i];
    } else {
      for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dsum.v[i];
    }
    return dx;
  }

  void collect_params(std::vector<Param<S>*>& out) {
    conv1_.collect_params(out);
    bn1_.collect_params(out);
    conv2_.collect_params(out);
    bn2_.collect_params(out);
    if (projected_) {
      proj_conv_->collect_params(out);
      proj_bn_->collect_params(out);
    }
  }

  bool projected() const { return projected_; }
  Conv2d<S>& conv1() { return conv1_; }
  Conv2d<S>& conv2() { return conv2_; }
  BatchNorm2d<S>& bn1() { return bn1_; }
  BatchNorm2d<S>& bn2() { return bn2_; }
  Conv2d<S>& proj_conv() { return *proj_conv_; }
  BatchNorm2d<S>& proj_bn() { return *proj_bn_; }

 private:
  Conv2d<S> conv1_;
  BatchNorm2d<S> bn1_;
  Relu<S> relu1_;
  Conv2d<S> conv2_;
  BatchNorm2d<S> bn2_;
  bool projected_;
  std::unique_ptr<Conv2d<S>> proj_conv_;
  std::unique_ptr<BatchNorm2d<S>> proj_bn_;
  Relu<S> relu_out_;
};

}  // namespace serkit::nn
