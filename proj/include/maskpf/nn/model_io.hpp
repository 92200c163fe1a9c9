// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "maskpf/dsp.hpp"
#include "maskpf/mask.hpp"
#include "maskpf/nn/models.hpp"
#include "maskpf/nn/train.hpp"

namespace maskpf::nn {

/// Everything needed to run a trained estimator.
struct ModelFile {
  std::unique_ptr<MaskNet> net;
  NormStats stats;
  TrainConfig train;
  MaskConfig mask;
  std::uint64_t seed = 0;
};

/// "MPF1", a little-endian uint32 byte count, JSON metadata (spec, tensor
/// names and shapes, normalization stats, training and mask config, seed),
/// then each tensor as little-endian float32 in declared order.
void save_model(const std::filesystem::path& path, const MaskNet& net, const NormStats& stats,
                const TrainConfig& train, const MaskConfig& mask, std::uint64_t seed);

std::string serialize_model(const MaskNet& net, const NormStats& stats, const TrainConfig& train,
                            const MaskConfig& mask, std::uint64_t seed);

/// Throws corrupt-model on a bad magic, malformed metadata, tensor
/// mismatch, truncation or trailing bytes.
ModelFile load_model(const std::filesystem::path& path);
ModelFile parse_model(const std::string& bytes);

}  // namespace maskpf::nn
