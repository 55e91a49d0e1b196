#include "serkit/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "serkit/errors.hpp"
#include "serkit/util.hpp"

namespace serkit::audio_io {

namespace {

struct Reader {
  const uint8_t* p;
  size_t n;
  size_t off = 0;

  void need(size_t k, const char* what) const {
    if (off + k > n) throw MalformedContainer(std::string("truncated ") + what);
  }
  uint16_t u16() {
    need(2, "u16");
    uint16_t v;
    std::memcpy(&v, p + off, 2);
    off += 2;
    return v;
  }
  uint32_t u32() {
    need(4, "u32");
    uint32_t v;
    std::memcpy(&v, p + off, 4);
    off += 4;
    return v;
  }
  void tag(char out[4]) {
    need(4, "chunk tag");
    std::memcpy(out, p + off, 4);
    off += 4;
  }
};

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

}  // namespace

AudioClip decode_wav_bytes(const uint8_t* bytes, size_t n, std::string source_path) {
  Reader r{bytes, n};
  char tag[4];
  r.tag(tag);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw MalformedContainer("missing RIFF magic");
  r.u32();  // declared riff size; real files lie, so we trust the buffer
  r.tag(tag);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw MalformedContainer("missing WAVE magic");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;

  while (r.off + 8 <= r.n) {
    r.tag(tag);
    uint32_t chunk = r.u32();
    if (r.off + chunk > r.n) throw MalformedContainer("chunk overruns file");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk < 16) throw MalformedContainer("fmt chunk too small");
      size_t fmt_end = r.off + chunk;
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      r.off = fmt_end;
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = r.p + r.off;
      data_len = chunk;
      r.off += chunk;
    } else {
      r.off += chunk;
    }
    if (chunk % 2) r.off += 1;  // chunks are word-aligned
  }

  if (!have_fmt) throw MalformedContainer("no fmt chunk");
  if (data == nullptr) throw MalformedContainer("no data chunk");
  if (rate == 0) throw MalformedContainer("zero sample rate");
  if (channels != 1 && channels != 2)
    throw UnsupportedEncoding(std::to_string(channels) + " channels");
  bool pcm16 = format == kFormatPcm && bits == 16;
  bool f32 = format == kFormatIeeeFloat && bits == 32;
  if (!pcm16 && !f32)
    throw UnsupportedEncoding("format tag " + std::to_string(format) + " with " +
                              std::to_string(bits) + " bits");

  size_t bytes_per_sample = bits / 8;
  size_t frame_size = bytes_per_sample * channels;
  size_t frames = data_len / frame_size;
  if (frames == 0) throw EmptyAudio("zero sample frames");

  AudioClip clip;
  clip.sample_rate_hz = rate;
  clip.source_path = std::move(source_path);
  clip.samples.resize(frames);

  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < channels; ++c) {
      const uint8_t* s = data + i * frame_size + c * bytes_per_sample;
      if (pcm16) {
        int16_t v;
        std::memcpy(&v, s, 2);
        acc += v / 32768.0;
      } else {
        float v;
        std::memcpy(&v, s, 4);
        if (!std::isfinite(v)) throw MalformedContainer("non-finite float sample");
        acc += std::clamp(static_cast<double>(v), -1.0, 1.0);
      }
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

AudioClip decode_wav(const std::filesystem::path& path) {
  auto bytes = read_binary_file(path);
  return decode_wav_bytes(bytes.data(), bytes.size(), path.string());
}

std::vector<uint8_t> encode_wav_bytes(const AudioClip& clip) {
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_len = n * 2;
  std::vector<uint8_t> out(44 + data_len);
  auto put_u32 = [&](size_t off, uint32_t v) { std::memcpy(out.data() + off, &v, 4); };
  auto put_u16 = [&](size_t off, uint16_t v) { std::memcpy(out.data() + off, &v, 2); };

  std::memcpy(out.data(), "RIFF", 4);
  put_u32(4, 36 + data_len);
  std::memcpy(out.data() + 8, "WAVE", 4);
  std::memcpy(out.data() + 12, "fmt ", 4);
  put_u32(16, 16);
  put_u16(20, kFormatPcm);
  put_u16(22, 1);  // mono
  put_u32(24, clip.sample_rate_hz);
  put_u32(28, clip.sample_rate_hz * 2);
  put_u16(32, 2);   // block align
  put_u16(34, 16);  // bits
  std::memcpy(out.data() + 36, "data", 4);
  put_u32(40, data_len);

  for (uint32_t i = 0; i < n; ++i) {
    double x = std::clamp(clip.samples[i], -1.0, 1.0);
    long q = std::lround(x * 32768.0);
    int16_t v = static_cast<int16_t>(std::clamp(q, -32768L, 32767L));
    std::memcpy(out.data() + 44 + i * 2, &v, 2);
  }
  return out;
}

void encode_wav(const std::filesystem::path& path, const AudioClip& clip) {
  auto bytes = encode_wav_bytes(clip);
  write_binary_file(path, bytes.data(), bytes.size());
}

AudioClip resample(const AudioClip& clip, uint32_t target_rate_hz) {
  if (target_rate_hz == 0) throw ShapeMismatch("target rate must be positive");
  if (target_rate_hz == clip.sample_rate_hz) return clip;

  const size_t len = clip.samples.size();
  const double ratio = static_cast<double>(clip.sample_rate_hz) / target_rate_hz;
  const size_t out_len = static_cast<size_t>(
      std::llround(static_cast<double>(len) * target_rate_hz / clip.sample_rate_hz));

  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  out.source_path = clip.source_path;
  out.samples.resize(std::max<size_t>(out_len, 1));

  for (size_t i = 0; i < out.samples.size(); ++i) {
    double pos = i * ratio;
    size_t lo = std::min(static_cast<size_t>(pos), len - 1);
    size_t hi = std::min(lo + 1, len - 1);
    double t = pos - static_cast<double>(lo);
    // std::lerp is monotone and exact at the endpoints, so interpolated
    // values never escape [min(samples), max(samples)].
    out.samples[i] = std::lerp(clip.samples[lo], clip.samples[hi], std::clamp(t, 0.0, 1.0));
  }
  return out;
}

}  // namespace serkit::audio_io
