// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "maskpf/audio.hpp"
#include "maskpf/dsp.hpp"
#include "maskpf/mask.hpp"
#include "maskpf/nn/model_io.hpp"

namespace maskpf {

/// One predicted mask row per frame of already-normalized features. Early
/// frames replicate frame 0 to fill the causal context.
MaskMatrix infer_masks(nn::MaskNet& net, const Matrix& normalized_features, std::size_t batch_size = 256);

/// A trained model plus its normalization statistics. Inference mutates the
/// network's layer caches, so one instance must not be shared across threads.
class MaskEstimator {
 public:
  explicit MaskEstimator(nn::ModelFile model);
  static MaskEstimator load(const std::filesystem::path& path);

  MaskMatrix masks(const Spectrogram& coded);
  Spectrogram enhance(const Spectrogram& coded);
  /// Output length is that of istft over the input's frames.
  AudioBuffer enhance(const AudioBuffer& coded);

  const nn::ModelFile& model() const { return model_; }

 private:
  nn::ModelFile model_;
};

}  // namespace maskpf
