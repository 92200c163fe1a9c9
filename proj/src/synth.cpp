// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "maskpf/degrade.hpp"
#include "maskpf/rng.hpp"

namespace maskpf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kBlock = 16;  // envelope update interval, 1 ms

struct Formants {
  std::array<double, 4> freq;
};

constexpr std::array<double, 4> kBandwidths{70.0, 110.0, 170.0, 250.0};

Formants random_formants(Rng& rng, double scale) {
  return {{rng.uniform(300.0, 850.0) * scale, rng.uniform(900.0, 2300.0) * scale,
           rng.uniform(2350.0, 3000.0) * scale, rng.uniform(3300.0, 4200.0) * scale}};
}

// Cascade of second-order resonances, unity gain at DC.
double tract_gain(double hz, const std::array<double, 4>& formants) {
  double g = 1.0;
  for (std::size_t i = 0; i < formants.size(); ++i) {
    const double f2 = formants[i] * formants[i];
    const double a = f2 - hz * hz;
    const double b = kBandwidths[i] * hz;
    g *= f2 / std::sqrt(a * a + b * b);
  }
  return g;
}

double envelope(std::size_t i, std::size_t len, std::size_t ramp) {
  const std::size_t r = std::min(ramp, len / 2);
  if (r == 0) return 1.0;
  double pos = 1.0;
  if (i < r) pos = static_cast<double>(i) / static_cast<double>(r);
  if (i >= len - r) pos = static_cast<double>(len - 1 - i) / static_cast<double>(r);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * pos);
}

void add_voiced(std::vector<double>& out, std::size_t start, std::size_t len, Rng& rng, const VoiceStyle& style) {
  const double fs = kSampleRate;
  const double f0_start = rng.uniform(style.f0_min_hz, style.f0_max_hz);
  const double f0_end = std::clamp(f0_start * rng.uniform(0.85, 1.15), style.f0_min_hz * 0.8, style.f0_max_hz * 1.2);
  const Formants from = random_formants(rng, style.formant_scale);
  const Formants to = random_formants(rng, style.formant_scale);
  const double level = rng.uniform(0.5, 1.0);
  const auto max_harmonics = static_cast<std::size_t>(7800.0 / (style.f0_min_hz * 0.8));
  std::vector<double> phase(max_harmonics, 0.0);
  for (double& p : phase) p = rng.uniform(0.0, kTwoPi);
  std::vector<double> amp(max_harmonics, 0.0);

  const std::size_t ramp = static_cast<std::size_t>(0.02 * fs);
  double f0 = f0_start;
  for (std::size_t i = 0; i < len; ++i) {
    if (i % kBlock == 0) {
      const double u = static_cast<double>(i) / static_cast<double>(len);
      f0 = f0_start + (f0_end - f0_start) * u + 2.0 * std::sin(kTwoPi * 5.0 * static_cast<double>(i) / fs);
      std::array<double, 4> formants{};
      for (std::size_t j = 0; j < 4; ++j) formants[j] = from.freq[j] + (to.freq[j] - from.freq[j]) * u;
      for (std::size_t h = 0; h < max_harmonics; ++h) {
        const double hz = f0 * static_cast<double>(h + 1);
        amp[h] = hz < 7800.0 ? tract_gain(hz, formants) / static_cast<double>(h + 1) : 0.0;
      }
    }
    double s = 0.0;
    for (std::size_t h = 0; h < max_harmonics; ++h) {
      if (amp[h] == 0.0) continue;
      phase[h] += kTwoPi * f0 * static_cast<double>(h + 1) / fs;
      if (phase[h] > kTwoPi) phase[h] -= kTwoPi;
      s += amp[h] * std::sin(phase[h]);
    }
    out[start + i] += 0.05 * level * envelope(i, len, ramp) * s;
  }
}

void add_fricative(std::vector<double>& out, std::size_t start, std::size_t len, Rng& rng) {
  const double fs = kSampleRate;
  const double centre = rng.uniform(3000.0, 6000.0);
  const double bw = rng.uniform(800.0, 2000.0);
  const double level = rng.uniform(0.03, 0.08);
  // Two-pole resonator.
  const double r = std::exp(-std::numbers::pi * bw / fs);
  const double a1 = -2.0 * r * std::cos(kTwoPi * centre / fs);
  const double a2 = r * r;
  double y1 = 0.0, y2 = 0.0;
  const std::size_t ramp = static_cast<std::size_t>(0.015 * fs);
  for (std::size_t i = 0; i < len; ++i) {
    const double y = (1.0 - r) * rng.normal() - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    out[start + i] += level * envelope(i, len, ramp) * y;
  }
}

}  // namespace

VoiceStyle speaker_variant(const VoiceStyle& base, std::uint64_t seed, double spread) {
  if (spread == 0.0) return base;
  Rng rng(mix_seed(seed, 0x5BEA));
  const double pitch = std::exp(spread * rng.uniform(-1.0, 1.0));
  const double formant = std::exp(0.3 * spread * rng.uniform(-1.0, 1.0));
  VoiceStyle v = base;
  v.f0_min_hz *= pitch;
  v.f0_max_hz *= pitch;
  v.formant_scale *= formant;
  return v;
}

AudioBuffer synthesize_utterance(std::uint64_t seed, const VoiceStyle& style) {
  Rng rng(mix_seed(seed, 0x5EED));
  const double fs = kSampleRate;
  const auto total = static_cast<std::size_t>(style.duration_s * fs);
  std::vector<double> out(total, 0.0);

  auto ms = [&](double lo, double hi) { return static_cast<std::size_t>(rng.uniform(lo, hi) * fs / 1000.0); };
  std::size_t pos = ms(80.0, 200.0);
  while (pos < total) {
    const std::size_t voiced = std::min(ms(150.0, 350.0), total - pos);
    add_voiced(out, pos, voiced, rng, style);
    pos += voiced;
    if (pos < total && rng.uniform() < 0.35) {
      const std::size_t fric = std::min(ms(60.0, 140.0), total - pos);
      add_fricative(out, pos, fric, rng);
      pos += fric;
    }
    pos += ms(30.0, 120.0);
  }

  const double floor_rms = std::pow(10.0, style.noise_floor_db / 20.0);
  double peak = 0.0;
  for (double s : out) peak = std::max(peak, std::abs(s));
  const double gain = peak > 0.0 ? 0.5 / peak : 1.0;
  for (double& s : out) s = s * gain + floor_rms * rng.normal();

  AudioBuffer buf;
  buf.samples = std::move(out);
  buf.role = SignalRole::kClean;
  return buf;
}

}  // namespace maskpf
