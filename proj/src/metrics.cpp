// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "maskpf/error.hpp"

namespace maskpf {

double log_spectral_distance(const Spectrogram& ref, const Spectrogram& test) {
  if (ref.frames != test.frames || !(ref.config == test.config)) {
    throw Error(ErrorKind::kInvalidInput, "spectrogram shapes differ");
  }
  if (ref.frames == 0) throw Error(ErrorKind::kEmptyInput, "empty spectrogram");
  const std::size_t bins = ref.config.n_processed;
  double total = 0.0;
  for (std::size_t t = 0; t < ref.frames; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double d = 20.0 * std::log10(std::abs(ref.at(t, k)) + kLogFloor) -
                       20.0 * std::log10(std::abs(test.at(t, k)) + kLogFloor);
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(bins));
  }
  return total / static_cast<double>(ref.frames);
}

double log_spectral_distance(const AudioBuffer& ref, const AudioBuffer& test) {
  if (ref.size() != test.size()) {
    throw Error(ErrorKind::kInvalidInput, "length mismatch: " + std::to_string(ref.size()) + " vs " +
                                              std::to_string(test.size()));
  }
  return log_spectral_distance(stft(ref), stft(test));
}

double segmental_snr(const AudioBuffer& ref, const AudioBuffer& test, std::size_t frame) {
  if (ref.size() != test.size()) throw Error(ErrorKind::kInvalidInput, "length mismatch");
  if (frame == 0) throw Error(ErrorKind::kInvalidConfig, "frame length must be positive");
  const std::size_t frames = ref.size() / frame;
  std::vector<double> signal(frames, 0.0), noise(frames, 0.0);
  double peak = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = f * frame; i < (f + 1) * frame; ++i) {
      const double d = test.samples[i] - ref.samples[i];
      signal[f] += ref.samples[i] * ref.samples[i];
      noise[f] += d * d;
    }
    peak = std::max(peak, signal[f]);
  }
  if (!(peak > 0.0)) throw Error(ErrorKind::kEmptyInput, "no active frames in reference");
  const double threshold = peak * 1e-4;
  double sum = 0.0;
  std::size_t active = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    if (signal[f] < threshold) continue;
    const double snr = noise[f] > 0.0 ? 10.0 * std::log10(signal[f] / noise[f]) : kSegSnrMax;
    sum += std::clamp(snr, kSegSnrMin, kSegSnrMax);
    ++active;
  }
  return sum / static_cast<double>(active);
}

std::vector<UtteranceMetrics> MetricReport::system_means() const {
  std::vector<UtteranceMetrics> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> counts;
  for (const auto& r : rows) {
    auto [it, inserted] = index.emplace(r.system, out.size());
    if (inserted) {
      out.push_back({"__mean__", r.system, 0.0, 0.0});
      counts.push_back(0);
    }
    out[it->second].lsd_db += r.lsd_db;
    out[it->second].seg_snr_db += r.seg_snr_db;
    ++counts[it->second];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].lsd_db /= static_cast<double>(counts[i]);
    out[i].seg_snr_db /= static_cast<double>(counts[i]);
  }
  return out;
}

}  // namespace maskpf
