#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "serkit/rng.hpp"
#include "serkit/tensor.hpp"

namespace serkit::augment {

struct LabeledExample {
  FeatureTensor features;
  std::array<double, 8> label = {};  // probability vector over the 8 classes
  uint64_t id = 0;
};

struct MixupSample {
  FeatureTensor x_tilde;
  std::array<double, 8> y_tilde = {};
  double lambda = 0.0;
  std::pair<uint64_t, uint64_t> parent_ids;
};

struct ImageAugConfig {
  double max_rotate_deg = 4.0;
  double zoom_lo = 1.0;  // zoom-in only
  double zoom_hi = 1.15;
  double brightness_delta = 0.4;  // additive in the log domain
};

struct ResizePolicy {
  std::vector<size_t> stage_sizes = {128, 256};  // strictly increasing, >= 8
};

// Convex combination of two examples and their label distributions.
// lambda = 1 returns the first parent exactly.
MixupSample mixup(const LabeledExample& a, const LabeledExample& b, double lambda);

// Beta(alpha, alpha) draw via two gamma draws.
double sample_lambda(double alpha, Rng& rng);

// Rotation about the center (angle uniform in +-max_rotate_deg) composed with
// zoom-in (uniform in [zoom_lo, zoom_hi]); output pixels are inverse-mapped
// and bilinearly sampled; out-of-bounds sources take the tensor minimum.
FeatureTensor random_affine(const FeatureTensor& spec, const ImageAugConfig& cfg, Rng& rng);
// Deterministic core, exposed for tests.
FeatureTensor affine_transform(const FeatureTensor& spec, double angle_deg, double zoom,
                               float fill_value);

// Adds one uniform draw from +-brightness_delta to every cell (a gain in the
// power domain).
FeatureTensor brightness_shift(const FeatureTensor& spec, const ImageAugConfig& cfg, Rng& rng);

// Bilinear resize, align-corners-false convention.
FeatureTensor resize_bilinear(const FeatureTensor& spec, size_t out_h, size_t out_w);

// frames x n_mels -> n_mels x frames, then resize to size x size.
FeatureTensor to_model_square(const FeatureTensor& spec, size_t size);

FeatureTensor transpose2d(const FeatureTensor& t);

}  // namespace serkit::augment
