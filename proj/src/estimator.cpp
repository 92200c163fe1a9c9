// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/estimator.hpp"

#include <algorithm>

#include "maskpf/error.hpp"
#include "maskpf/nn/train.hpp"

namespace maskpf {

MaskMatrix infer_masks(nn::MaskNet& net, const Matrix& normalized_features, std::size_t batch_size) {
  const auto& spec = net.spec();
  if (normalized_features.rows == 0) throw Error(ErrorKind::kEmptyInput, "no frames to process");
  if (normalized_features.cols != spec.input_bins) {
    throw Error(ErrorKind::kInvalidInput, "feature width does not match the model input");
  }
  const std::size_t frames = normalized_features.rows;
  const std::size_t window = spec.context_frames * spec.input_bins;
  const nn::ForwardContext ctx{nn::Mode::kInfer, nullptr, 0.9};
  MaskMatrix out{Matrix(frames, spec.output_bins), MaskKind::kPredicted};
  for (std::size_t start = 0; start < frames; start += batch_size) {
    const std::size_t n = std::min(batch_size, frames - start);
    nn::Tensor x({n, spec.context_frames, spec.input_bins});
    for (std::size_t i = 0; i < n; ++i) {
      nn::context_window(normalized_features, start + i, spec.context_frames, x.data() + i * window);
    }
    const nn::Tensor y = net.forward(x, ctx);
    std::copy(y.values().begin(), y.values().end(), out.values.data.begin() + start * spec.output_bins);
  }
  return out;
}

MaskEstimator::MaskEstimator(nn::ModelFile model) : model_(std::move(model)) {
  if (!model_.net) throw Error(ErrorKind::kInvalidInput, "estimator needs a network");
}

MaskEstimator MaskEstimator::load(const std::filesystem::path& path) { return MaskEstimator(nn::load_model(path)); }

MaskMatrix MaskEstimator::masks(const Spectrogram& coded) {
  const FeatureMatrix normalized = normalize(log_magnitude(coded), model_.stats);
  return infer_masks(*model_.net, normalized.values);
}

Spectrogram MaskEstimator::enhance(const Spectrogram& coded) { return apply_mask(masks(coded), coded); }

AudioBuffer MaskEstimator::enhance(const AudioBuffer& coded) {
  validate(coded);
  return istft(enhance(stft(coded)), StftConfig{}, SignalRole::kEnhanced);
}

}  // namespace maskpf
