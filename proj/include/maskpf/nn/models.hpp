// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "maskpf/nn/layers.hpp"
#include "maskpf/nn/params.hpp"
#include "maskpf/nn/tensor.hpp"

namespace maskpf::nn {

enum class ModelKind { kFcnn, kLstm, kCed };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Architecture of a mask estimator. Defaults reproduce the published
/// networks; the size knobs exist so tests can build miniature versions.
struct ModelSpec {
  ModelKind kind = ModelKind::kCed;
  std::size_t context_frames = 6;  // past frames + current, causal
  std::size_t input_bins = 205;
  std::size_t output_bins = 205;

  std::size_t fcnn_hidden = 1024;
  double fcnn_dropout = 0.2;

  std::size_t lstm_units1 = 400;
  std::size_t lstm_units2 = 205;
  double lstm_dropout = 0.1;
  double lstm_recurrent_dropout = 0.2;

  std::array<std::size_t, 4> ced_channels{16, 32, 64, 128};

  static ModelSpec defaults(ModelKind kind);
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

/// Per-sample output shape (channels x time x freq) of a named layer.
struct ShapeTrace {
  std::string layer;
  std::array<std::size_t, 3> shape;
};

/// A mask estimator: [N, context_frames, input_bins] features in,
/// [N, output_bins] gains in (0, 2) out.
class MaskNet {
 public:
  virtual ~MaskNet() = default;

  static std::unique_ptr<MaskNet> build(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Tensor forward(const Tensor& context, const ForwardContext& ctx);
  /// Accumulates parameter gradients for the preceding forward().
  void backward(const Tensor& grad_out);

  /// Layer shapes seen by the most recent forward(); empty for dense models.
  virtual std::vector<ShapeTrace> shape_trace() const { return {}; }

 protected:
  explicit MaskNet(ModelSpec spec) : spec_(std::move(spec)) {}
  virtual Tensor forward_impl(const Tensor& context, const ForwardContext& ctx) = 0;
  virtual void backward_impl(const Tensor& grad_out) = 0;

  ModelSpec spec_;
  ParamStore params_;
};

/// Total stored values, batch-norm moving statistics included.
std::size_t param_count(const ParamStore& params);

}  // namespace maskpf::nn
