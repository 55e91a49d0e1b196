#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace serkit {

// Dense row-major n-dimensional float32 array. The interchange value between
// feature extraction, augmentation and the classifiers; also the payload of
// the SERT tensor file format.
struct FeatureTensor {
  std::vector<size_t> dims;
  std::vector<float> data;
  std::map<std::string, std::string> meta;

  FeatureTensor() = default;
  explicit FeatureTensor(std::vector<size_t> d);

  size_t numel() const;
  size_t rows() const { return dims.empty() ? 0 : dims[0]; }
  size_t cols() const { return dims.size() < 2 ? 0 : dims[1]; }

  float& at2(size_t r, size_t c) { return data[r * dims[1] + c]; }
  float at2(size_t r, size_t c) const { return data[r * dims[1] + c]; }

  bool same_dims(const FeatureTensor& o) const { return dims == o.dims; }
  // Throws ShapeMismatch unless dims == product(dims) etc. hold.
  void validate() const;

  float min_value() const;
  float max_value() const;
};

// SERT binary format: magic "SERT", u32 LE version = 1, u8 dtype code
// (1 = float32 LE), u32 LE ndim, ndim x u64 LE dims, row-major payload.
// Round-trips are bit-exact. meta is in-memory only and not serialized.
std::vector<uint8_t> sert_encode(const FeatureTensor& t);
FeatureTensor sert_decode(const uint8_t* bytes, size_t n);

void save_sert(const std::filesystem::path& p, const FeatureTensor& t);
FeatureTensor load_sert(const std::filesystem::path& p);

}  // namespace serkit
