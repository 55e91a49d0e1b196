#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "serkit/audio_io.hpp"
#include "serkit/tensor.hpp"

namespace serkit::dsp {

struct StftConfig {
  size_t frame_len = 1024;  // must be a power of two
  size_t hop_len = 256;     // 0 < hop_len <= frame_len
};

struct MelConfig {
  size_t n_mels = 128;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;  // 0 means sample_rate / 2
  double log_floor = 1e-10;
};

// HTK mel mapping, m = 2595 * log10(1 + f / 700). Inverse bijection on [0, inf).
double hz_to_mel(double f_hz);
double mel_to_hz(double mel);

// In-place iterative radix-2 FFT over a power-of-two length buffer.
// inverse=true applies the conjugate transform including the 1/N scale.
void fft_radix2(std::vector<std::complex<double>>& buf, bool inverse = false);

// Power spectrogram, frames x (frame_len/2 + 1). The signal is reflect-padded
// by frame_len/2 on both ends and each frame is Hann-windowed, so the frame
// count is 1 + floor(len / hop). Values are |X|^2.
FeatureTensor stft_power(const audio_io::AudioClip& clip, const StftConfig& cfg);

// Triangular mel filterbank, n_mels x n_fft_bins, centers equally spaced on
// the mel axis. No area normalization. Throws DegenerateFilter when a filter
// covers no FFT bin.
FeatureTensor build_mel_filterbank(const MelConfig& cfg, uint32_t sample_rate_hz,
                                   size_t n_fft_bins);

// log(max(filterbank . power, log_floor)) per frame; frames x n_mels.
FeatureTensor log_mel_spectrogram(const audio_io::AudioClip& clip,
                                  const StftConfig& stft_cfg, const MelConfig& mel_cfg);

// Orthonormal DCT-II matrix, n_out x n_in: row 0 scaled by sqrt(1/n_in),
// the rest by sqrt(2/n_in).
FeatureTensor dct2_matrix(size_t n_in, size_t n_out);

// DCT-II of each log-mel frame; frames x n_mfcc.
FeatureTensor mfcc(const audio_io::AudioClip& clip, const StftConfig& stft_cfg,
                   const MelConfig& mel_cfg, size_t n_mfcc);

// Arithmetic mean over the time axis of a frames x d tensor.
FeatureTensor mean_pool_time(const FeatureTensor& features);

}  // namespace serkit::dsp
