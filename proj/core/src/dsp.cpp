#include "serkit/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "serkit/errors.hpp"

namespace serkit::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_stft_cfg(const StftConfig& cfg) {
  if (!is_pow2(cfg.frame_len))
    throw ShapeMismatch("frame_len must be a power of two, got " +
                        std::to_string(cfg.frame_len));
  if (cfg.hop_len == 0 || cfg.hop_len > cfg.frame_len)
    throw ShapeMismatch("need 0 < hop_len <= frame_len");
}

// Periodic Hann window.
std::vector<double> hann(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

// Reflect index into [0, len) without repeating the edge sample.
size_t reflect_index(ptrdiff_t i, size_t len) {
  if (len == 1) return 0;
  const ptrdiff_t period = 2 * (static_cast<ptrdiff_t>(len) - 1);
  ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<ptrdiff_t>(len)) m = period - m;
  return static_cast<size_t>(m);
}

}  // namespace

double hz_to_mel(double f_hz) { return 2595.0 * std::log10(1.0 + f_hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void fft_radix2(std::vector<std::complex<double>>& buf, bool inverse) {
  const size_t n = buf.size();
  if (!is_pow2(n)) throw ShapeMismatch("FFT length must be a power of two");
  if (n == 1) return;

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = buf[i + k];
        std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : buf) x /= static_cast<double>(n);
  }
}

FeatureTensor stft_power(const audio_io::AudioClip& clip, const StftConfig& cfg) {
  check_stft_cfg(cfg);
  const size_t len = clip.samples.size();
  if (len < 2) throw ClipTooShort("need at least 2 samples, got " + std::to_string(len));

  const size_t frame = cfg.frame_len;
  const size_t hop = cfg.hop_len;
  const size_t pad = frame / 2;
  const size_t n_bins = frame / 2 + 1;
  const size_t n_frames = 1 + len / hop;
  const auto window = hann(frame);

  FeatureTensor out({n_frames, n_bins});
  std::vector<std::complex<double>> buf(frame);

  for (size_t f = 0; f < n_frames; ++f) {
    const ptrdiff_t start = static_cast<ptrdiff_t>(f * hop) - static_cast<ptrdiff_t>(pad);
    for (size_t i = 0; i < frame; ++i) {
      size_t src = reflect_index(start + static_cast<ptrdiff_t>(i), len);
      buf[i] = {clip.samples[src] * window[i], 0.0};
    }
    fft_radix2(buf);
    for (size_t b = 0; b < n_bins; ++b) out.at2(f, b) = static_cast<float>(std::norm(buf[b]));
  }
  return out;
}

FeatureTensor build_mel_filterbank(const MelConfig& cfg, uint32_t sample_rate_hz,
                                   size_t n_fft_bins) {
  const double nyquist = sample_rate_hz / 2.0;
  const double f_max = cfg.f_max_hz > 0.0 ? cfg.f_max_hz : nyquist;
  if (cfg.n_mels < 2) throw ShapeMismatch("need n_mels >= 2");
  if (!(cfg.f_min_hz >= 0.0 && cfg.f_min_hz < f_max && f_max <= nyquist + 1e-9))
    throw ShapeMismatch("need 0 <= f_min < f_max <= sample_rate/2");
  if (n_fft_bins < 2) throw ShapeMismatch("need at least 2 FFT bins");

  const size_t frame = (n_fft_bins - 1) * 2;
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(frame);
  const double mel_lo = hz_to_mel(cfg.f_min_hz);
  const double mel_hi = hz_to_mel(f_max);

  // n_mels + 2 points equally spaced in mel; filter k spans points k..k+2
  // with its apex at point k+1.
  std::vector<double> edges(cfg.n_mels + 2);
  for (size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(cfg.n_mels + 1));

  FeatureTensor fb({cfg.n_mels, n_fft_bins});
  for (size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    double row_sum = 0.0;
    for (size_t b = 0; b < n_fft_bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > left && f < right)
        w = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      fb.at2(m, b) = static_cast<float>(w);
      row_sum += w;
    }
    if (row_sum <= 0.0)
      throw DegenerateFilter("mel filter " + std::to_string(m) +
                             " covers no FFT bin; lower n_mels or raise frame_len");
  }
  return fb;
}

FeatureTensor log_mel_spectrogram(const audio_io::AudioClip& clip,
                                  const StftConfig& stft_cfg, const MelConfig& mel_cfg) {
  const FeatureTensor power = stft_power(clip, stft_cfg);
  const size_t n_bins = power.cols();
  const FeatureTensor fb = build_mel_filterbank(mel_cfg, clip.sample_rate_hz, n_bins);

  FeatureTensor out({power.rows(), mel_cfg.n_mels});
  for (size_t f = 0; f < power.rows(); ++f) {
    for (size_t m = 0; m < mel_cfg.n_mels; ++m) {
      double acc = 0.0;
      for (size_t b = 0; b < n_bins; ++b)
        acc += static_cast<double>(fb.at2(m, b)) * static_cast<double>(power.at2(f, b));
      out.at2(f, m) = static_cast<float>(std::log(std::max(acc, mel_cfg.log_floor)));
    }
  }
  out.meta["hop_len"] = std::to_string(stft_cfg.hop_len);
  out.meta["n_mels"] = std::to_string(mel_cfg.n_mels);
  return out;
}

FeatureTensor dct2_matrix(size_t n_in, size_t n_out) {
  if (n_out < 1 || n_out > n_in) throw ShapeMismatch("need 1 <= n_out <= n_in");
  FeatureTensor m({n_out, n_in});
  const double s0 = std::sqrt(1.0 / static_cast<double>(n_in));
  const double sk = std::sqrt(2.0 / static_cast<double>(n_in));
  for (size_t k = 0; k < n_out; ++k)
    for (size_t j = 0; j < n_in; ++j)
      m.at2(k, j) = static_cast<float>(
          (k == 0 ? s0 : sk) *
          std::cos(kPi * (2.0 * j + 1.0) * static_cast<double>(k) / (2.0 * n_in)));
  return m;
}

FeatureTensor mfcc(const audio_io::AudioClip& clip, const StftConfig& stft_cfg,
                   const MelConfig& mel_cfg, size_t n_mfcc) {
  if (n_mfcc > mel_cfg.n_mels) throw ShapeMismatch("n_mfcc must be <= n_mels");
  const FeatureTensor logmel = log_mel_spectrogram(clip, stft_cfg, mel_cfg);
  const FeatureTensor dct = dct2_matrix(mel_cfg.n_mels, n_mfcc);

  FeatureTensor out({logmel.rows(), n_mfcc});
  for (size_t f = 0; f < logmel.rows(); ++f)
    for (size_t k = 0; k < n_mfcc; ++k) {
      double acc = 0.0;
      for (size_t m = 0; m < mel_cfg.n_mels; ++m)
        acc += static_cast<double>(dct.at2(k, m)) * static_cast<double>(logmel.at2(f, m));
      out.at2(f, k) = static_cast<float>(acc);
    }
  return out;
}

FeatureTensor mean_pool_time(const FeatureTensor& features) {
  if (features.dims.size() != 2 || features.rows() < 1)
    throw ShapeMismatch("mean_pool_time expects a non-empty frames x d tensor");
  const size_t frames = features.rows(), d = features.cols();
  FeatureTensor out({d});
  for (size_t c = 0; c < d; ++c) {
    double acc = 0.0;
    for (size_t f = 0; f < frames; ++f) acc += static_cast<double>(features.at2(f, c));
    out.data[c] = static_cast<float>(acc / static_cast<double>(frames));
  }
  return out;
}

}  // namespace serkit::dsp
