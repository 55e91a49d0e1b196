#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace serkit::audio_io {

// Normalized mono waveform. Samples are finite and within [-1, 1];
// immutable by convention once decoded.
struct AudioClip {
  std::vector<double> samples;
  uint32_t sample_rate_hz = 0;
  std::string source_path;

  double duration_s() const {
    return sample_rate_hz ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float, 1 or 2
// channels. Stereo is averaged to mono; 16-bit integers are scaled by
// 1/32768. Throws MalformedContainer, UnsupportedEncoding or EmptyAudio.
AudioClip decode_wav(const std::filesystem::path& path);
AudioClip decode_wav_bytes(const uint8_t* bytes, size_t n, std::string source_path = "");

// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] and quantized with
// round(x * 32768), saturating at 32767.
void encode_wav(const std::filesystem::path& path, const AudioClip& clip);
std::vector<uint8_t> encode_wav_bytes(const AudioClip& clip);

// Linear-interpolation resampler. Output length = round(len * target/source).
// Not a polyphase design; adequate for classification features, not for
// hi-fi playback.
AudioClip resample(const AudioClip& clip, uint32_t target_rate_hz);

}  // namespace serkit::audio_io
