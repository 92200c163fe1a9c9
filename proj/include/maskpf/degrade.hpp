// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "maskpf/audio.hpp"

namespace maskpf {

/// Severity presets of the surrogate codec; q_low is the coarsest.
enum class Preset { kLow, kMid, kHigh };

std::string_view to_string(Preset preset);
Preset parse_preset(std::string_view name);

/// Quantizer settings of one preset. Steps are in nepers (natural-log
/// magnitude units) for the bands [0,1k), [1k,2k), [2k,4k), [4k,8k] Hz.
struct PresetTable {
  std::array<double, 4> steps;
  double jitter_ratio;  // jitter standard deviation as a fraction of the step
  double hf_gain;       // linear gain applied above hf_loss_start_hz
};

const PresetTable& preset_table(Preset preset);

struct DegradeProfile {
  Preset level = Preset::kLow;
  std::uint64_t seed = 0;
  double hf_loss_start_hz = 4000.0;
};

/// Signal-correlated spectral degradation: every STFT bin is multiplied by
/// exp(Q(ln|X|) + jitter - ln|X|) times the high-band loss, then resynthesized
/// with the original phase. Zero input bins stay zero; the output has the
/// input length.
AudioBuffer surrogate_code(const AudioBuffer& clean, const DegradeProfile& profile);

struct AlignedPair {
  AudioBuffer clean;
  AudioBuffer coded;
  long lag = 0;  // coded[n + lag] ~ clean[n]
  double peak_correlation = 0.0;
  bool aligned = false;  // false: peak below 0.2, pair returned unshifted
};

inline constexpr double kMinAlignmentCorrelation = 0.2;

/// Finds the lag in [-max_lag, max_lag] maximizing the normalized
/// cross-correlation, removes it and truncates both signals to a common length.
AlignedPair align_pair(const AudioBuffer& clean, const AudioBuffer& coded, std::size_t max_lag);

AlignedPair load_pair(const std::filesystem::path& clean_path, const std::filesystem::path& coded_path,
                      std::size_t max_lag = 800);

/// Speaker-like parameters of the synthetic speech generator.
struct VoiceStyle {
  double f0_min_hz = 95.0;
  double f0_max_hz = 170.0;
  double formant_scale = 1.0;
  double duration_s = 2.0;
  double noise_floor_db = -65.0;
};

inline VoiceStyle alternate_voice_style() { return VoiceStyle{170.0, 280.0, 1.15, 2.0, -60.0}; }

/// Per-speaker variation around `base`: pitch range scaled by exp(spread * u)
/// and formants by exp(0.3 * spread * v), u and v uniform in [-1, 1].
/// spread = 0 returns `base`.
VoiceStyle speaker_variant(const VoiceStyle& base, std::uint64_t seed, double spread);

/// Deterministic speech-like signal: formant-filtered harmonic syllables with
/// gliding pitch, fricative noise bursts, pauses and a low noise floor.
AudioBuffer synthesize_utterance(std::uint64_t seed, const VoiceStyle& style = {});

}  // namespace maskpf
