// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "maskpf/audio.hpp"
#include "maskpf/dsp.hpp"

namespace maskpf {

/// Mean over frames of the RMS (over the processed bins) difference of
/// 20 log10(|X| + 1e-12) between reference and test spectrograms.
double log_spectral_distance(const Spectrogram& ref, const Spectrogram& test);

/// Time-domain entry point: both signals go through stft() first.
double log_spectral_distance(const AudioBuffer& ref, const AudioBuffer& test);

inline constexpr double kSegSnrMin = -10.0;
inline constexpr double kSegSnrMax = 35.0;

/// Per-frame SNR clamped to [-10, 35] dB averaged over frames whose reference
/// power is within 40 dB of the loudest reference frame.
double segmental_snr(const AudioBuffer& ref, const AudioBuffer& test, std::size_t frame = 256);

struct UtteranceMetrics {
  std::string utterance;
  std::string system;
  double lsd_db = 0.0;
  double seg_snr_db = 0.0;
};

struct MetricReport {
  std::vector<UtteranceMetrics> rows;

  /// Corpus means per system, in first-appearance order.
  std::vector<UtteranceMetrics> system_means() const;
};

}  // namespace maskpf
