// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "maskpf/nn/params.hpp"
#include "maskpf/nn/tensor.hpp"
#include "maskpf/rng.hpp"

namespace maskpf::nn {

enum class Mode { kTrain, kInfer };

struct ForwardContext {
  Mode mode = Mode::kInfer;
  Rng* rng = nullptr;  // dropout masks; required in train mode when dropout is active
  double bn_momentum = 0.9;
};

/// A layer caches what its backward pass needs during forward(); backward()
/// must follow the forward() it differentiates. Parameter gradients are
/// accumulated into the owning ParamStore.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, const ForwardContext& ctx) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
};

/// Glorot-uniform limit sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// [N, in] -> [N, out]
class Dense : public Layer {
 public:
  Dense(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& init);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

  Param& weight() { return *weight_; }
  Param& bias() { return *bias_; }

 private:
  std::size_t in_, out_;
  Param* weight_;  // [out, in]
  Param* bias_;
  Tensor input_;
};

/// Normalizes dimension 1 over the batch and all trailing dimensions.
/// Four stored values per channel: gamma, beta, moving mean, moving variance.
class BatchNorm : public Layer {
 public:
  BatchNorm(ParamStore& store, const std::string& name, std::size_t channels, double eps = 1e-5);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::size_t channels_;
  double eps_;
  Param* gamma_;
  Param* beta_;
  Param* moving_mean_;
  Param* moving_var_;
  Mode mode_ = Mode::kInfer;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor input_;
};

class Elu : public Layer {
 public:
  explicit Elu(double alpha = 1.0) : alpha_(alpha) {}
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  double alpha_;
  Tensor input_, output_;
};

/// scale * sigmoid(z); z is clamped to [-30, 30] so the output stays strictly
/// inside (0, scale) in double precision.
class ScaledSigmoid : public Layer {
 public:
  explicit ScaledSigmoid(double scale = 2.0) : scale_(scale) {}
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

  static constexpr double kClamp = 30.0;

 private:
  double scale_;
  Tensor input_, sigma_;
};

/// Inverted dropout; identity in infer mode.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate) : rate_(rate) {}
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  double rate_;
  std::vector<double> mask_;
};

struct Conv2dShape {
  std::size_t in_channels, out_channels;
  std::size_t kernel_h, kernel_w;
  std::size_t stride_h, stride_w;
};

/// Valid (unpadded) strided convolution, [N, Cin, H, W] -> [N, Cout, Ho, Wo]
/// with Ho = (H - kh) / sh + 1.
class Conv2d : public Layer {
 public:
  Conv2d(ParamStore& store, const std::string& name, const Conv2dShape& shape, Rng& init);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

  static std::size_t out_size(std::size_t in, std::size_t kernel, std::size_t stride) {
    return (in - kernel) / stride + 1;
  }

 private:
  Conv2dShape s_;
  Param* weight_;  // [Cout, Cin * kh * kw]
  Param* bias_;
  std::vector<std::size_t> in_shape_;
  std::size_t out_h_ = 0, out_w_ = 0;
  std::vector<double> cols_;  // [N, Ho * Wo, Cin * kh * kw]
};

/// Transposed convolution (no padding), [N, Cin, H, W] -> [N, Cout, Ho, Wo]
/// with Ho = (H - 1) * sh + kh.
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(ParamStore& store, const std::string& name, const Conv2dShape& shape, Rng& init);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

  static std::size_t out_size(std::size_t in, std::size_t kernel, std::size_t stride) {
    return (in - 1) * stride + kernel;
  }

 private:
  Conv2dShape s_;
  Param* weight_;  // [Cin, Cout * kh * kw]
  Param* bias_;
  Tensor input_;
  std::size_t out_h_ = 0, out_w_ = 0;
};

/// LSTM over [N, T, F] with gate order (input, forget, cell, output).
/// Dropout masks are drawn once per sequence: `input_dropout` on x_t and
/// `recurrent_dropout` on h_{t-1}.
class Lstm : public Layer {
 public:
  Lstm(ParamStore& store, const std::string& name, std::size_t in, std::size_t hidden, bool return_sequences,
       double input_dropout, double recurrent_dropout, Rng& init);
  /// Output [N, T, H] when returning sequences, else the last step [N, H].
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::size_t in_, hidden_;
  bool return_sequences_;
  double input_dropout_, recurrent_dropout_;
  Param* kernel_;     // [4H, F]
  Param* recurrent_;  // [4H, H]
  Param* bias_;       // [4H]
  std::size_t batch_ = 0, steps_ = 0;
  // Cached per (n, t).
  std::vector<double> x_in_;    // masked input, [N, T, F]
  std::vector<double> h_prev_;  // masked previous hidden, [N, T, H]
  std::vector<double> gates_;   // activated gates, [N, T, 4H]
  std::vector<double> cell_;    // [N, T + 1, H], index 0 is the initial state
  std::vector<double> mask_x_, mask_h_;
};

}  // namespace maskpf::nn
