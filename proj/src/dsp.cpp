// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "maskpf/error.hpp"
#include "maskpf/fft.hpp"
#include "maskpf/kernels.hpp"

namespace maskpf {

void StftConfig::validate() const {
  if (frame_len < 2 || frame_len % 2 != 0) throw Error(ErrorKind::kInvalidConfig, "frame_len must be even and >= 2");
  if (hop * 2 != frame_len) throw Error(ErrorKind::kInvalidConfig, "hop must be frame_len / 2");
  if (fft_len != frame_len) throw Error(ErrorKind::kInvalidConfig, "fft_len must equal frame_len");
  if (n_bins != fft_len / 2 + 1) throw Error(ErrorKind::kInvalidConfig, "n_bins must be fft_len / 2 + 1");
  if (n_processed > n_bins) throw Error(ErrorKind::kInvalidConfig, "n_processed exceeds n_bins");
}

std::vector<double> sqrt_hann(std::size_t frame_len) {
  if (frame_len < 2 || frame_len % 2 != 0) {
    throw Error(ErrorKind::kInvalidConfig, "window length must be even and >= 2");
  }
  std::vector<double> w(frame_len);
  const double n = static_cast<double>(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i) {
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n));
  }
  return w;
}

Spectrogram stft(const AudioBuffer& buf, const StftConfig& cfg) {
  cfg.validate();
  validate(buf);
  if (buf.size() < cfg.frame_len) {
    throw Error(ErrorKind::kTooShort, "signal of " + std::to_string(buf.size()) + " samples is shorter than one frame");
  }
  const auto window = sqrt_hann(cfg.frame_len);
  Spectrogram spec;
  spec.config = cfg;
  spec.frames = (buf.size() - cfg.frame_len) / cfg.hop + 1;
  spec.data.resize(spec.frames * cfg.n_bins);

  auto& fft = real_fft(cfg.fft_len);
  std::vector<double> frame(cfg.frame_len);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double* src = buf.samples.data() + t * cfg.hop;
    for (std::size_t i = 0; i < cfg.frame_len; ++i) frame[i] = src[i] * window[i];
    fft.forward(frame, spec.frame(t));
  }
  return spec;
}

AudioBuffer istft(const Spectrogram& spec, const StftConfig& cfg, SignalRole role) {
  cfg.validate();
  if (!(spec.config == cfg)) throw Error(ErrorKind::kInvalidConfig, "spectrogram was produced with a different config");
  if (spec.frames == 0) throw Error(ErrorKind::kInvalidInput, "empty spectrogram");
  const auto window = sqrt_hann(cfg.frame_len);
  AudioBuffer out;
  out.role = role;
  out.samples.assign((spec.frames - 1) * cfg.hop + cfg.frame_len, 0.0);

  auto& fft = real_fft(cfg.fft_len);
  std::vector<double> frame(cfg.frame_len);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    fft.inverse(spec.frame(t), frame);
    double* dst = out.samples.data() + t * cfg.hop;
    for (std::size_t i = 0; i < cfg.frame_len; ++i) dst[i] += frame[i] * window[i];
  }
  return out;
}

Matrix magnitudes(const Spectrogram& spec, std::optional<std::size_t> bins) {
  const std::size_t nb = bins.value_or(spec.config.n_processed);
  if (nb > spec.config.n_bins) throw Error(ErrorKind::kInvalidInput, "bin count exceeds spectrogram width");
  Matrix m(spec.frames, nb);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < nb; ++k) m(t, k) = std::abs(spec.at(t, k));
  }
  return m;
}

FeatureMatrix log_magnitude(const Spectrogram& spec, double floor_eps) {
  if (!(floor_eps > 0.0)) throw Error(ErrorKind::kInvalidConfig, "floor_eps must be positive");
  FeatureMatrix out;
  out.values = magnitudes(spec);
  for (double& v : out.values.data) v = std::log(std::max(v, floor_eps));
  return out;
}

NormStats compute_norm_stats(std::span<const Matrix> features) {
  if (features.empty()) throw Error(ErrorKind::kEmptyInput, "no feature matrices");
  const std::size_t bins = features.front().cols;
  std::vector<double> sum(bins, 0.0);
  std::size_t count = 0;
  for (const auto& f : features) {
    if (f.cols != bins) throw Error(ErrorKind::kInvalidInput, "feature width mismatch");
    for (std::size_t t = 0; t < f.rows; ++t) {
      for (std::size_t k = 0; k < bins; ++k) sum[k] += f(t, k);
    }
    count += f.rows;
  }
  if (count == 0) throw Error(ErrorKind::kEmptyInput, "no feature frames");
  NormStats stats;
  stats.mean.resize(bins);
  stats.stddev.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) stats.mean[k] = sum[k] / static_cast<double>(count);
  // Second pass for the variance; the features can have large offsets.
  std::vector<double> sq(bins, 0.0);
  for (const auto& f : features) {
    for (std::size_t t = 0; t < f.rows; ++t) {
      for (std::size_t k = 0; k < bins; ++k) {
        const double d = f(t, k) - stats.mean[k];
        sq[k] += d * d;
      }
    }
  }
  for (std::size_t k = 0; k < bins; ++k) {
    stats.stddev[k] = std::max(std::sqrt(sq[k] / static_cast<double>(count)), 1e-6);
  }
  return stats;
}

FeatureMatrix normalize(const FeatureMatrix& features, const NormStats& stats) {
  const std::size_t bins = features.values.cols;
  if (stats.mean.size() != bins || stats.stddev.size() != bins) {
    throw Error(ErrorKind::kMissingStats, "normalization stats do not cover " + std::to_string(bins) + " bins");
  }
  FeatureMatrix out;
  out.values = Matrix(features.values.rows, bins);
  for (std::size_t t = 0; t < features.values.rows; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      out.values(t, k) = (features.values(t, k) - stats.mean[k]) / std::max(stats.stddev[k], 1e-6);
    }
  }
  out.stats = stats;
  return out;
}

FeatureMatrix denormalize(const FeatureMatrix& normalized) {
  if (!normalized.stats) throw Error(ErrorKind::kMissingStats, "feature matrix carries no normalization stats");
  const auto& stats = *normalized.stats;
  const std::size_t bins = normalized.values.cols;
  FeatureMatrix out;
  out.values = Matrix(normalized.values.rows, bins);
  for (std::size_t t = 0; t < normalized.values.rows; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      out.values(t, k) = normalized.values(t, k) * std::max(stats.stddev[k], 1e-6) + stats.mean[k];
    }
  }
  return out;
}

std::vector<double> cepstrum_from_magnitude(std::span<const double> magnitude, double floor_eps) {
  if (magnitude.size() < 2) throw Error(ErrorKind::kInvalidInput, "magnitude spectrum too short");
  const std::size_t n = (magnitude.size() - 1) * 2;
  std::vector<std::complex<double>> logmag(magnitude.size());
  for (std::size_t k = 0; k < magnitude.size(); ++k) logmag[k] = std::log(std::max(magnitude[k], floor_eps));
  std::vector<double> c(n);
  real_fft(n).inverse(logmag, c);
  return c;
}

std::vector<double> log_magnitude_from_cepstrum(std::span<const double> cepstrum) {
  const std::size_t n = cepstrum.size();
  std::vector<std::complex<double>> spec(n / 2 + 1);
  real_fft(n).forward(cepstrum, spec);
  std::vector<double> out(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) out[k] = spec[k].real();
  return out;
}

std::vector<double> real_cepstrum(std::span<const double> frame, CepstrumWindow window, double floor_eps) {
  constexpr std::size_t kLen = 512;
  if (frame.size() != kLen) {
    throw Error(ErrorKind::kInvalidInput, "cepstrum frame must have 512 samples, got " + std::to_string(frame.size()));
  }
  std::vector<double> x(frame.begin(), frame.end());
  if (window == CepstrumWindow::kSqrtHann) {
    const auto w = sqrt_hann(kLen);
    for (std::size_t i = 0; i < kLen; ++i) x[i] *= w[i];
  }
  std::vector<std::complex<double>> spec(kLen / 2 + 1);
  real_fft(kLen).forward(x, spec);
  std::vector<double> mag(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) mag[k] = std::abs(spec[k]);
  return cepstrum_from_magnitude(mag, floor_eps);
}

namespace {

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

// Ideal low-pass impulse response with cutoff fc (fraction of fs).
double lowpass_tap(double fc, double m) {
  if (m == 0.0) return 2.0 * fc;
  return std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
}

std::vector<double> design_band_pass(double low_hz, double high_hz) {
  constexpr double kAttenDb = 60.0;
  constexpr double kTransitionHz = 60.0;
  const double fs = kSampleRate;
  const double dw = 2.0 * std::numbers::pi * kTransitionHz / fs;
  auto taps = static_cast<std::size_t>(std::ceil((kAttenDb - 8.0) / (2.285 * dw))) + 1;
  if (taps % 2 == 0) ++taps;
  const double beta = kaiser_beta(kAttenDb);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  const double mid = static_cast<double>(taps - 1) / 2.0;
  std::vector<double> h(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    const double m = static_cast<double>(i) - mid;
    const double r = m / mid;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[i] = w * (lowpass_tap(high_hz / fs, m) - lowpass_tap(low_hz / fs, m));
  }
  return h;
}

}  // namespace

const std::vector<double>& band_limit_taps(double cutoff_hz) {
  static std::mutex mutex;
  static std::map<double, std::vector<double>> cache;
  if (!(cutoff_hz > 100.0 && cutoff_hz < kSampleRate / 2.0)) {
    throw Error(ErrorKind::kInvalidConfig, "band_limit cutoff must lie in (100 Hz, 8 kHz)");
  }
  std::lock_guard lock(mutex);
  auto it = cache.find(cutoff_hz);
  if (it == cache.end()) it = cache.emplace(cutoff_hz, design_band_pass(70.0, cutoff_hz)).first;
  return it->second;
}

AudioBuffer band_limit(const AudioBuffer& buf, double cutoff_hz) {
  validate(buf);
  const auto& h = band_limit_taps(cutoff_hz);
  const std::size_t half = (h.size() - 1) / 2;
  std::vector<double> padded(buf.size() + 2 * half, 0.0);
  std::copy(buf.samples.begin(), buf.samples.end(), padded.begin() + static_cast<std::ptrdiff_t>(half));
  AudioBuffer out;
  out.role = buf.role;
  out.samples.resize(buf.size());
  // Symmetric taps: correlation equals convolution.
  for (std::size_t n = 0; n < buf.size(); ++n) out.samples[n] = kernels::dot(h.data(), padded.data() + n, h.size());
  return out;
}

double active_rms(const AudioBuffer& buf) {
  constexpr std::size_t kFrame = 256;
  std::vector<std::pair<double, std::size_t>> frames;
  double peak = 0.0;
  for (std::size_t start = 0; start < buf.size(); start += kFrame) {
    const std::size_t len = std::min(kFrame, buf.size() - start);
    double e = 0.0;
    for (std::size_t i = start; i < start + len; ++i) e += buf.samples[i] * buf.samples[i];
    frames.emplace_back(e, len);
    peak = std::max(peak, e / static_cast<double>(len));
  }
  if (!(peak > 0.0)) throw Error(ErrorKind::kCannotNormalize, "signal is all zero");
  const double threshold = peak * 1e-3;
  double energy = 0.0;
  std::size_t count = 0;
  for (const auto& [e, len] : frames) {
    if (e / static_cast<double>(len) >= threshold) {
      energy += e;
      count += len;
    }
  }
  return std::sqrt(energy / static_cast<double>(count));
}

LevelResult level_normalize(const AudioBuffer& buf, double target_db) {
  validate(buf);
  LevelResult r;
  r.active_rms_before = active_rms(buf);
  r.scale = std::pow(10.0, target_db / 20.0) / r.active_rms_before;
  r.buffer = buf;
  for (double& s : r.buffer.samples) s *= r.scale;
  return r;
}

}  // namespace maskpf
