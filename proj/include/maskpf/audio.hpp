// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace maskpf {

inline constexpr int kSampleRate = 16000;

enum class SignalRole { kClean, kCoded, kEnhanced };

std::string_view to_string(SignalRole role);

/// Mono 16 kHz signal with amplitudes nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  SignalRole role = SignalRole::kClean;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Throws invalid-input when the rate is not 16 kHz or a sample is NaN/Inf.
void validate(const AudioBuffer& buf);

enum class WavFormat { kPcm16, kFloat32 };

/// Reads mono 16 kHz WAV (PCM16 or IEEE float32). Other layouts are rejected
/// with an io or invalid-input error.
AudioBuffer read_wav(const std::filesystem::path& path, SignalRole role = SignalRole::kClean);

/// PCM16 clips to [-1, 1); float32 writes the samples as-is.
void write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
               WavFormat format = WavFormat::kFloat32);

}  // namespace maskpf
