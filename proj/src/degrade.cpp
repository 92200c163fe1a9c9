// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maskpf/dsp.hpp"
#include "maskpf/error.hpp"
#include "maskpf/kernels.hpp"
#include "maskpf/rng.hpp"

namespace maskpf {

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::kLow: return "q_low";
    case Preset::kMid: return "q_mid";
    case Preset::kHigh: return "q_high";
  }
  return "unknown";
}

Preset parse_preset(std::string_view name) {
  if (name == "q_low") return Preset::kLow;
  if (name == "q_mid") return Preset::kMid;
  if (name == "q_high") return Preset::kHigh;
  throw Error(ErrorKind::kInvalidConfig, "unknown preset '" + std::string(name) + "'");
}

const PresetTable& preset_table(Preset preset) {
  static const PresetTable low{{0.9, 1.1, 1.4, 1.8}, 0.25, 0.5};
  static const PresetTable mid{{0.6, 0.75, 0.95, 1.2}, 0.25, 0.7};
  static const PresetTable high{{0.3, 0.4, 0.5, 0.65}, 0.25, 0.88};
  switch (preset) {
    case Preset::kLow: return low;
    case Preset::kMid: return mid;
    case Preset::kHigh: return high;
  }
  return low;
}

namespace {

std::size_t band_of(double hz) {
  if (hz < 1000.0) return 0;
  if (hz < 2000.0) return 1;
  if (hz < 4000.0) return 2;
  return 3;
}

// Loss ramps in dB over 500 Hz above the start frequency.
double hf_gain_at(double hz, double start_hz, double full_gain) {
  if (hz <= start_hz) return 1.0;
  const double ramp = std::min(1.0, (hz - start_hz) / 500.0);
  return std::pow(full_gain, ramp);
}

}  // namespace

AudioBuffer surrogate_code(const AudioBuffer& clean, const DegradeProfile& profile) {
  validate(clean);
  const StftConfig cfg;
  const PresetTable& table = preset_table(profile.level);

  // Pad so that every original sample is covered by two frames.
  const std::size_t lead = cfg.frame_len - cfg.hop;
  const std::size_t body = clean.size() + lead;
  const std::size_t frames = (body + cfg.hop - 1) / cfg.hop;
  AudioBuffer padded;
  padded.samples.assign((frames - 1) * cfg.hop + cfg.frame_len, 0.0);
  std::copy(clean.samples.begin(), clean.samples.end(), padded.samples.begin() + static_cast<std::ptrdiff_t>(lead));

  Spectrogram spec = stft(padded, cfg);
  Rng rng(mix_seed(profile.seed, static_cast<std::uint64_t>(profile.level)));
  const double bin_hz = static_cast<double>(kSampleRate) / static_cast<double>(cfg.fft_len);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < cfg.n_bins; ++k) {
      const double hz = static_cast<double>(k) * bin_hz;
      const double step = table.steps[band_of(hz)];
      // Draw unconditionally so the jitter sequence does not depend on content.
      const double jitter = table.jitter_ratio * step * rng.normal();
      auto& x = spec.at(t, k);
      const double mag = std::abs(x);
      if (!(mag > std::numeric_limits<double>::min())) {
        x = 0.0;
        continue;
      }
      const double l = std::log(mag);
      const double q = step * std::round(l / step);
      x *= std::exp(q + jitter - l) * hf_gain_at(hz, profile.hf_loss_start_hz, table.hf_gain);
    }
  }
  AudioBuffer resynth = istft(spec, cfg, SignalRole::kCoded);
  AudioBuffer out;
  out.role = SignalRole::kCoded;
  out.samples.assign(resynth.samples.begin() + static_cast<std::ptrdiff_t>(lead),
                     resynth.samples.begin() + static_cast<std::ptrdiff_t>(lead + clean.size()));
  return out;
}

AlignedPair align_pair(const AudioBuffer& clean, const AudioBuffer& coded, std::size_t max_lag) {
  validate(clean);
  validate(coded);
  AlignedPair out;
  const double e_clean = kernels::dot(clean.samples.data(), clean.samples.data(), clean.size());
  const double e_coded = kernels::dot(coded.samples.data(), coded.samples.data(), coded.size());
  const double norm = std::sqrt(e_clean * e_coded);

  long best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  const long limit = static_cast<long>(max_lag);
  for (long lag = -limit; lag <= limit; ++lag) {
    // r(lag) = sum_n clean[n] * coded[n + lag]
    const long n0 = std::max(0L, -lag);
    const long n1 = std::min(static_cast<long>(clean.size()), static_cast<long>(coded.size()) - lag);
    if (n1 <= n0) continue;
    const double r = kernels::dot(clean.samples.data() + n0, coded.samples.data() + n0 + lag,
                                  static_cast<std::size_t>(n1 - n0));
    if (r > best) {
      best = r;
      best_lag = lag;
    }
  }
  out.peak_correlation = norm > 0.0 ? best / norm : 0.0;
  out.aligned = out.peak_correlation >= kMinAlignmentCorrelation;
  out.lag = out.aligned ? best_lag : 0;

  const std::size_t clean_off = out.lag < 0 ? static_cast<std::size_t>(-out.lag) : 0;
  const std::size_t coded_off = out.lag > 0 ? static_cast<std::size_t>(out.lag) : 0;
  const std::size_t len = std::min(clean.size() - std::min(clean.size(), clean_off),
                                   coded.size() - std::min(coded.size(), coded_off));
  out.clean.role = SignalRole::kClean;
  out.coded.role = SignalRole::kCoded;
  out.clean.samples.assign(clean.samples.begin() + static_cast<std::ptrdiff_t>(clean_off),
                           clean.samples.begin() + static_cast<std::ptrdiff_t>(clean_off + len));
  out.coded.samples.assign(coded.samples.begin() + static_cast<std::ptrdiff_t>(coded_off),
                           coded.samples.begin() + static_cast<std::ptrdiff_t>(coded_off + len));
  return out;
}

AlignedPair load_pair(const std::filesystem::path& clean_path, const std::filesystem::path& coded_path,
                      std::size_t max_lag) {
  return align_pair(read_wav(clean_path, SignalRole::kClean), read_wav(coded_path, SignalRole::kCoded), max_lag);
}

}  // namespace maskpf
