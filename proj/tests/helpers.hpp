// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "maskpf/audio.hpp"
#include "maskpf/degrade.hpp"
#include "maskpf/dsp.hpp"
#include "maskpf/error.hpp"
#include "maskpf/rng.hpp"

namespace maskpf::test {

// Direct O(N^2) DFT, bins 0..N/2.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = -2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    out[k] = acc;
  }
  return out;
}

inline AudioBuffer noise(std::size_t n, std::uint64_t seed, double scale = 0.1) {
  Rng rng(seed);
  AudioBuffer b;
  b.samples.resize(n);
  for (auto& s : b.samples) s = scale * rng.normal();
  return b;
}

inline AudioBuffer tone(double hz, std::size_t n, double amplitude = 0.5) {
  AudioBuffer b;
  b.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRate);
  }
  return b;
}

inline double rms(const std::vector<double>& x, std::size_t begin = 0, std::size_t end = 0) {
  if (end == 0) end = x.size();
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(end - begin));
}

inline double rel_err(double a, double b) {
  const double d = std::max(std::abs(a), std::abs(b));
  return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

struct Pair {
  AudioBuffer clean, coded;
};

// Preprocessed synthetic utterance and its surrogate-coded version.
inline Pair surrogate_pair(std::uint64_t seed, Preset preset = Preset::kLow, double duration_s = 2.0) {
  VoiceStyle style;
  style.duration_s = duration_s;
  Pair p;
  p.clean = level_normalize(band_limit(synthesize_utterance(seed, style))).buffer;
  p.coded = band_limit(surrogate_code(p.clean, DegradeProfile{preset, seed}));
  return p;
}

// Kind of the maskpf::Error thrown by fn, or nullopt when nothing is thrown.
template <typename F>
std::optional<ErrorKind> kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("maskpf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace maskpf::test
