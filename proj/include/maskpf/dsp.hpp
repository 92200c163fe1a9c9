// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "maskpf/audio.hpp"
#include "maskpf/matrix.hpp"

namespace maskpf {

inline constexpr double kLogFloor = 1e-12;

/// 32 ms frames, 16 ms hop at 16 kHz; only the lowest 205 bins (0..6.4 kHz)
/// are processed by the mask estimator.
struct StftConfig {
  std::size_t frame_len = 512;
  std::size_t hop = 256;
  std::size_t fft_len = 512;
  std::size_t n_bins = 257;
  std::size_t n_processed = 205;

  void validate() const;
  bool operator==(const StftConfig&) const = default;
};

struct Spectrogram {
  StftConfig config;
  std::size_t frames = 0;
  std::vector<std::complex<double>> data;  // frames x n_bins

  std::complex<double>& at(std::size_t t, std::size_t k) { return data[t * config.n_bins + k]; }
  std::complex<double> at(std::size_t t, std::size_t k) const { return data[t * config.n_bins + k]; }
  std::span<std::complex<double>> frame(std::size_t t) { return {data.data() + t * config.n_bins, config.n_bins}; }
  std::span<const std::complex<double>> frame(std::size_t t) const {
    return {data.data() + t * config.n_bins, config.n_bins};
  }
};

/// Per-bin statistics of log-magnitude features; stddev is floored at 1e-6.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct FeatureMatrix {
  Matrix values;                   // frames x n_processed
  std::optional<NormStats> stats;  // attached once normalized
};

/// Periodic square-root Hann window: w[i] = sqrt(0.5 - 0.5 cos(2 pi i / N)).
std::vector<double> sqrt_hann(std::size_t frame_len);

/// Frames start at t * hop with no pre-padding; a trailing partial frame is
/// dropped. Throws too-short when the signal is shorter than one frame.
Spectrogram stft(const AudioBuffer& buf, const StftConfig& cfg = {});

/// Weighted overlap-add with the sqrt-Hann synthesis window. Output length is
/// (T - 1) * hop + frame_len.
AudioBuffer istft(const Spectrogram& spec, const StftConfig& cfg = {},
                  SignalRole role = SignalRole::kEnhanced);

/// |spec| over the first `bins` bins (default: the processed band).
Matrix magnitudes(const Spectrogram& spec, std::optional<std::size_t> bins = std::nullopt);

/// ln(max(|X|, floor_eps)) over the processed band; stats left empty.
FeatureMatrix log_magnitude(const Spectrogram& spec, double floor_eps = kLogFloor);

/// Global per-bin mean/std over the rows of every matrix.
NormStats compute_norm_stats(std::span<const Matrix> features);

FeatureMatrix normalize(const FeatureMatrix& features, const NormStats& stats);

/// Inverse of normalize; throws missing-stats when none are attached.
FeatureMatrix denormalize(const FeatureMatrix& normalized);

enum class CepstrumWindow { kSqrtHann, kRectangular };

/// Real cepstrum of one 512-sample frame:
/// c = Re IDFT(ln(max(|DFT(w * frame)|, floor_eps))).
std::vector<double> real_cepstrum(std::span<const double> frame,
                                  CepstrumWindow window = CepstrumWindow::kSqrtHann,
                                  double floor_eps = kLogFloor);

/// Real cepstrum of a magnitude spectrum given as N/2 + 1 bins.
std::vector<double> cepstrum_from_magnitude(std::span<const double> magnitude, double floor_eps = kLogFloor);

/// Log-magnitude spectrum (N/2 + 1 bins) of an even real cepstrum.
std::vector<double> log_magnitude_from_cepstrum(std::span<const double> cepstrum);

/// Linear-phase band-pass standing in for the 7 kHz P.341 filter: Kaiser
/// windowed-sinc with a 70 Hz high-pass edge and `cutoff_hz` low-pass edge.
/// Output has the input length (zero-phase, zero-extended edges).
AudioBuffer band_limit(const AudioBuffer& buf, double cutoff_hz = 7000.0);

/// Filter taps used by band_limit for the given cutoff.
const std::vector<double>& band_limit_taps(double cutoff_hz = 7000.0);

struct LevelResult {
  AudioBuffer buffer;
  double scale = 1.0;
  double active_rms_before = 0.0;
};

/// RMS over 256-sample frames whose mean power is within 30 dB of the
/// loudest frame. Throws cannot-normalize on an all-zero signal.
double active_rms(const AudioBuffer& buf);

/// Scales the signal so its active RMS equals 10^(target_db / 20).
LevelResult level_normalize(const AudioBuffer& buf, double target_db = -26.0);

}  // namespace maskpf
