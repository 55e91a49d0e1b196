#include "serkit/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "serkit/errors.hpp"
#include "serkit/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "SERT serialization assumes a little-endian host");

namespace serkit {

FeatureTensor::FeatureTensor(std::vector<size_t> d) : dims(std::move(d)) {
  data.assign(numel(), 0.0f);
}

size_t FeatureTensor::numel() const {
  size_t n = 1;
  for (size_t d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void FeatureTensor::validate() const {
  if (dims.empty()) throw ShapeMismatch("tensor has no dims");
  for (size_t d : dims)
    if (d == 0) throw ShapeMismatch("tensor has a zero dim");
  if (numel() != data.size())
    throw ShapeMismatch("dims product " + std::to_string(numel()) +
                        " != data size " + std::to_string(data.size()));
  for (float v : data)
    if (!std::isfinite(v)) throw ShapeMismatch("tensor contains non-finite value");
}

float FeatureTensor::min_value() const {
  float m = std::numeric_limits<float>::infinity();
  for (float v : data) m = std::min(m, v);
  return m;
}

float FeatureTensor::max_value() const {
  float m = -std::numeric_limits<float>::infinity();
  for (float v : data) m = std::max(m, v);
  return m;
}

namespace {

constexpr uint8_t kMagic[4] = {0x53, 0x45, 0x52, 0x54};  // "SERT"
constexpr uint32_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 1;

template <class T>
void put(std::vector<uint8_t>& out, T v) {
  uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T take(const uint8_t* bytes, size_t n, size_t& off) {
  if (off + sizeof(T) > n) throw MalformedContainer("SERT data truncated");
  T v;
  std::memcpy(&v, bytes + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::vector<uint8_t> sert_encode(const FeatureTensor& t) {
  std::vector<uint8_t> out;
  out.reserve(13 + t.dims.size() * 8 + t.data.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<uint32_t>(out, kVersion);
  put<uint8_t>(out, kDtypeF32);
  put<uint32_t>(out, static_cast<uint32_t>(t.dims.size()));
  for (size_t d : t.dims) put<uint64_t>(out, static_cast<uint64_t>(d));
  size_t payload = out.size();
  out.resize(payload + t.data.size() * 4);
  if (!t.data.empty())
    std::memcpy(out.data() + payload, t.data.data(), t.data.size() * 4);
  return out;
}

FeatureTensor sert_decode(const uint8_t* bytes, size_t n) {
  size_t off = 0;
  if (n < 4 || std::memcmp(bytes, kMagic, 4) != 0)
    throw MalformedContainer("bad SERT magic");
  off = 4;
  uint32_t version = take<uint32_t>(bytes, n, off);
  if (version != kVersion)
    throw UnsupportedEncoding("SERT version " + std::to_string(version));
  uint8_t dtype = take<uint8_t>(bytes, n, off);
  if (dtype != kDtypeF32)
    throw UnsupportedEncoding("SERT dtype code " + std::to_string(dtype));
  uint32_t ndim = take<uint32_t>(bytes, n, off);
  FeatureTensor t;
  t.dims.resize(ndim);
  size_t count = 1;
  for (uint32_t i = 0; i < ndim; ++i) {
    uint64_t d = take<uint64_t>(bytes, n, off);
    if (d == 0 || d > n) throw MalformedContainer("bad SERT dim");
    t.dims[i] = static_cast<size_t>(d);
    count *= t.dims[i];
  }
  if (off + count * 4 != n) throw MalformedContainer("SERT payload size mismatch");
  t.data.resize(count);
  if (count) std::memcpy(t.data.data(), bytes + off, count * 4);
  return t;
}

void save_sert(const std::filesystem::path& p, const FeatureTensor& t) {
  auto bytes = sert_encode(t);
  write_binary_file(p, bytes.data(), bytes.size());
}

FeatureTensor load_sert(const std::filesystem::path& p) {
  auto bytes = read_binary_file(p);
  return sert_decode(bytes.data(), bytes.size());
}

}  // namespace serkit
