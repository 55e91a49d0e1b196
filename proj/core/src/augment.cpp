#include "serkit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "serkit/errors.hpp"

namespace serkit::augment {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_image(const FeatureTensor& t, const char* who) {
  if (t.dims.size() != 2 || t.rows() < 2 || t.cols() < 2)
    throw ShapeMismatch(std::string(who) + " expects an H x W tensor with H, W >= 2");
}

// Bilinear sample at (r, c) with out-of-bounds reads replaced by fill.
double sample_bilinear(const FeatureTensor& t, double r, double c, double fill) {
  const double h = static_cast<double>(t.rows()), w = static_cast<double>(t.cols());
  if (r <= -1.0 || r >= h || c <= -1.0 || c >= w) return fill;
  const ptrdiff_t r0 = static_cast<ptrdiff_t>(std::floor(r));
  const ptrdiff_t c0 = static_cast<ptrdiff_t>(std::floor(c));
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  auto at = [&](ptrdiff_t rr, ptrdiff_t cc) -> double {
    if (rr < 0 || rr >= static_cast<ptrdiff_t>(t.rows()) || cc < 0 ||
        cc >= static_cast<ptrdiff_t>(t.cols()))
      return fill;
    return t.at2(static_cast<size_t>(rr), static_cast<size_t>(cc));
  };
  const double top = at(r0, c0) * (1.0 - fc) + at(r0, c0 + 1) * fc;
  const double bot = at(r0 + 1, c0) * (1.0 - fc) + at(r0 + 1, c0 + 1) * fc;
  return top * (1.0 - fr) + bot * fr;
}

}  // namespace

MixupSample mixup(const LabeledExample& a, const LabeledExample& b, double lambda) {
  if (!a.features.same_dims(b.features))
    throw ShapeMismatch("mixup parents have different dims");
  if (lambda < 0.0 || lambda > 1.0) throw ShapeMismatch("lambda must be in [0, 1]");

  MixupSample out;
  out.lambda = lambda;
  out.parent_ids = {a.id, b.id};
  out.x_tilde.dims = a.features.dims;
  out.x_tilde.data.resize(a.features.data.size());
  for (size_t i = 0; i < out.x_tilde.data.size(); ++i)
    out.x_tilde.data[i] = static_cast<float>(
        lambda * static_cast<double>(a.features.data[i]) +
        (1.0 - lambda) * static_cast<double>(b.features.data[i]));
  for (size_t i = 0; i < out.y_tilde.size(); ++i)
    out.y_tilde[i] = lambda * a.label[i] + (1.0 - lambda) * b.label[i];
  return out;
}

double sample_lambda(double alpha, Rng& rng) {
  if (alpha <= 0.0) throw ShapeMismatch("mixup alpha must be > 0");
  return rng.beta(alpha, alpha);
}

FeatureTensor affine_transform(const FeatureTensor& spec, double angle_deg, double zoom,
                               float fill_value) {
  check_image(spec, "affine_transform");
  if (angle_deg == 0.0 && zoom == 1.0) return spec;

  const size_t h = spec.rows(), w = spec.cols();
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double rad = angle_deg * kPi / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);

  FeatureTensor out({h, w});
  out.meta = spec.meta;
  for (size_t r = 0; r < h; ++r) {
    for (size_t c = 0; c < w; ++c) {
      // Inverse map: un-zoom, then rotate by -angle about the center.
      const double dy = (static_cast<double>(r) - cy) / zoom;
      const double dx = (static_cast<double>(c) - cx) / zoom;
      const double sy = cy + (-sn * dx + cs * dy);
      const double sx = cx + (cs * dx + sn * dy);
      out.at2(r, c) = static_cast<float>(sample_bilinear(spec, sy, sx, fill_value));
    }
  }
  return out;
}

FeatureTensor random_affine(const FeatureTensor& spec, const ImageAugConfig& cfg, Rng& rng) {
  check_image(spec, "random_affine");
  if (cfg.max_rotate_deg < 0.0 || cfg.zoom_lo < 1.0 || cfg.zoom_hi < cfg.zoom_lo)
    throw ShapeMismatch("bad affine augmentation config");
  const double angle = rng.uniform(-cfg.max_rotate_deg, cfg.max_rotate_deg);
  const double zoom = rng.uniform(cfg.zoom_lo, cfg.zoom_hi);
  return affine_transform(spec, angle, zoom, spec.min_value());
}

FeatureTensor brightness_shift(const FeatureTensor& spec, const ImageAugConfig& cfg,
                               Rng& rng) {
  const double delta = rng.uniform(-cfg.brightness_delta, cfg.brightness_delta);
  FeatureTensor out = spec;
  for (float& v : out.data) v = static_cast<float>(static_cast<double>(v) + delta);
  return out;
}

FeatureTensor resize_bilinear(const FeatureTensor& spec, size_t out_h, size_t out_w) {
  check_image(spec, "resize_bilinear");
  if (out_h < 1 || out_w < 1) throw ShapeMismatch("resize target must be positive");

  const size_t h = spec.rows(), w = spec.cols();
  const double sr = static_cast<double>(h) / static_cast<double>(out_h);
  const double sc = static_cast<double>(w) / static_cast<double>(out_w);

  FeatureTensor out({out_h, out_w});
  out.meta = spec.meta;
  for (size_t r = 0; r < out_h; ++r) {
    double src_r = (static_cast<double>(r) + 0.5) * sr - 0.5;
    src_r = std::clamp(src_r, 0.0, static_cast<double>(h - 1));
    const size_t r0 = static_cast<size_t>(src_r);
    const size_t r1 = std::min(r0 + 1, h - 1);
    const double fr = src_r - static_cast<double>(r0);
    for (size_t c = 0; c < out_w; ++c) {
      double src_c = (static_cast<double>(c) + 0.5) * sc - 0.5;
      src_c = std::clamp(src_c, 0.0, static_cast<double>(w - 1));
      const size_t c0 = static_cast<size_t>(src_c);
      const size_t c1 = std::min(c0 + 1, w - 1);
      const double fc = src_c - static_cast<double>(c0);
      const double top = spec.at2(r0, c0) * (1.0 - fc) + spec.at2(r0, c1) * fc;
      const double bot = spec.at2(r1, c0) * (1.0 - fc) + spec.at2(r1, c1) * fc;
      out.at2(r, c) = static_cast<float>(top * (1.0 - fr) + bot * fr);
    }
  }
  return out;
}

FeatureTensor transpose2d(const FeatureTensor& t) {
  if (t.dims.size() != 2) throw ShapeMismatch("transpose2d expects a 2-d tensor");
  FeatureTensor out({t.cols(), t.rows()});
  out.meta = t.meta;
  for (size_t r = 0; r < t.rows(); ++r)
    for (size_t c = 0; c < t.cols(); ++c) out.at2(c, r) = t.at2(r, c);
  return out;
}

FeatureTensor to_model_square(const FeatureTensor& spec, size_t size) {
  FeatureTensor bands_by_time = transpose2d(spec);
  if (bands_by_time.rows() == size && bands_by_time.cols() == size) return bands_by_time;
  return resize_bilinear(bands_by_time, size, size);
}

}  // namespace serkit::augment
