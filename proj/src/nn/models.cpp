// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/nn/models.hpp"

#include <algorithm>

#include "maskpf/error.hpp"

namespace maskpf::nn {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFcnn: return "fcnn";
    case ModelKind::kLstm: return "lstm";
    case ModelKind::kCed: return "ced";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "fcnn") return ModelKind::kFcnn;
  if (name == "lstm") return ModelKind::kLstm;
  if (name == "ced") return ModelKind::kCed;
  throw Error(ErrorKind::kInvalidConfig, "unsupported model kind '" + std::string(name) + "'");
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  switch (kind) {
    case ModelKind::kFcnn: s.context_frames = 4; break;
    case ModelKind::kLstm: s.context_frames = 10; break;
    case ModelKind::kCed: s.context_frames = 6; break;
  }
  return s;
}

void ModelSpec::validate() const {
  if (context_frames == 0 || input_bins == 0 || output_bins == 0) {
    throw Error(ErrorKind::kInvalidConfig, "model dimensions must be positive");
  }
  if (kind == ModelKind::kCed) {
    if (output_bins != input_bins) throw Error(ErrorKind::kInvalidConfig, "CED maps input_bins to input_bins");
    if (context_frames < 5) throw Error(ErrorKind::kInvalidConfig, "CED needs at least 5 context frames");
    std::size_t f = input_bins;
    for (int i = 0; i < 4; ++i) {
      if (f < 3) throw Error(ErrorKind::kInvalidConfig, "too few bins for four stride-2 convolutions");
      f = (f - 3) / 2 + 1;
    }
  }
  for (double r : {fcnn_dropout, lstm_dropout, lstm_recurrent_dropout}) {
    if (r < 0.0 || r >= 1.0) throw Error(ErrorKind::kInvalidConfig, "dropout rate must lie in [0, 1)");
  }
}

Tensor MaskNet::forward(const Tensor& context, const ForwardContext& ctx) {
  if (context.rank() != 3 || context.dim(1) != spec_.context_frames || context.dim(2) != spec_.input_bins) {
    throw Error(ErrorKind::kInvalidInput, "expected [N, " + std::to_string(spec_.context_frames) + ", " +
                                              std::to_string(spec_.input_bins) + "], got " + context.shape_string());
  }
  return forward_impl(context, ctx);
}

void MaskNet::backward(const Tensor& grad_out) {
  if (grad_out.rank() != 2 || grad_out.dim(1) != spec_.output_bins) {
    throw Error(ErrorKind::kInvalidInput, "gradient shape mismatch: " + grad_out.shape_string());
  }
  backward_impl(grad_out);
}

std::size_t param_count(const ParamStore& params) { return params.param_count(); }

namespace {

// ---------------------------------------------------------------- FCNN

class Fcnn final : public MaskNet {
 public:
  Fcnn(const ModelSpec& spec, Rng& init)
      : MaskNet(spec),
        dense1_(params_, "fcnn.dense1", spec.context_frames * spec.input_bins, spec.fcnn_hidden, init),
        bn1_(params_, "fcnn.bn1", spec.fcnn_hidden),
        drop1_(spec.fcnn_dropout),
        dense2_(params_, "fcnn.dense2", spec.fcnn_hidden, spec.fcnn_hidden, init),
        bn2_(params_, "fcnn.bn2", spec.fcnn_hidden),
        drop2_(spec.fcnn_dropout),
        out_(params_, "fcnn.output", spec.fcnn_hidden, spec.output_bins, init) {}

 protected:
  Tensor forward_impl(const Tensor& x, const ForwardContext& ctx) override {
    // Frame-major flattening, oldest frame first.
    Tensor h = x.reshaped({x.dim(0), x.dim(1) * x.dim(2)});
    h = drop1_.forward(relu1_.forward(bn1_.forward(dense1_.forward(h, ctx), ctx), ctx), ctx);
    h = drop2_.forward(relu2_.forward(bn2_.forward(dense2_.forward(h, ctx), ctx), ctx), ctx);
    return sigmoid_.forward(out_.forward(h, ctx), ctx);
  }

  void backward_impl(const Tensor& g) override {
    Tensor d = out_.backward(sigmoid_.backward(g));
    d = dense2_.backward(bn2_.backward(relu2_.backward(drop2_.backward(d))));
    dense1_.backward(bn1_.backward(relu1_.backward(drop1_.backward(d))));
  }

 private:
  Dense dense1_;
  BatchNorm bn1_;
  Relu relu1_;
  Dropout drop1_;
  Dense dense2_;
  BatchNorm bn2_;
  Relu relu2_;
  Dropout drop2_;
  Dense out_;
  ScaledSigmoid sigmoid_;
};

// ---------------------------------------------------------------- LSTM

class LstmNet final : public MaskNet {
 public:
  LstmNet(const ModelSpec& spec, Rng& init)
      : MaskNet(spec),
        lstm1_(params_, "lstm.layer1", spec.input_bins, spec.lstm_units1, true, spec.lstm_dropout,
               spec.lstm_recurrent_dropout, init),
        lstm2_(params_, "lstm.layer2", spec.lstm_units1, spec.lstm_units2, false, spec.lstm_dropout,
               spec.lstm_recurrent_dropout, init),
        out_(params_, "lstm.output", spec.lstm_units2, spec.output_bins, init) {}

 protected:
  Tensor forward_impl(const Tensor& x, const ForwardContext& ctx) override {
    return sigmoid_.forward(out_.forward(lstm2_.forward(lstm1_.forward(x, ctx), ctx), ctx), ctx);
  }

  void backward_impl(const Tensor& g) override {
    lstm1_.backward(lstm2_.backward(out_.backward(sigmoid_.backward(g))));
  }

 private:
  Lstm lstm1_;
  Lstm lstm2_;
  Dense out_;
  ScaledSigmoid sigmoid_;
};

// ---------------------------------------------------------------- CED

// Convolution (or transposed convolution) + batch norm + ELU.
template <typename ConvT>
class ConvBlock {
 public:
  ConvBlock(ParamStore& store, const std::string& name, const Conv2dShape& shape, Rng& init)
      : conv_(store, name, shape, init), bn_(store, name + ".bn", shape.out_channels) {}

  Tensor forward(const Tensor& x, const ForwardContext& ctx) {
    return elu_.forward(bn_.forward(conv_.forward(x, ctx), ctx), ctx);
  }
  Tensor backward(const Tensor& g) { return conv_.backward(bn_.backward(elu_.backward(g))); }

 private:
  ConvT conv_;
  BatchNorm bn_;
  Elu elu_;
};

// [N, C1, T, F1] ++ [N, C2, T, F2] -> [N, C1 + C2, T, width], zero-padding
// each input at the high-frequency edge.
Tensor pad_concat(const Tensor& a, const Tensor& b, std::size_t width) {
  const std::size_t n = a.dim(0), t = a.dim(2);
  if (b.dim(0) != n || b.dim(2) != t || a.dim(3) > width || b.dim(3) > width) {
    throw Error(ErrorKind::kInvalidInput, "skip connection mismatch " + a.shape_string() + " / " + b.shape_string());
  }
  const std::size_t ca = a.dim(1), cb = b.dim(1);
  Tensor out({n, ca + cb, t, width});
  auto copy = [&](const Tensor& src, std::size_t channel_offset) {
    const std::size_t c = src.dim(1), f = src.dim(3);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t tt = 0; tt < t; ++tt) {
          const double* s = src.data() + ((i * c + ch) * t + tt) * f;
          double* d = out.data() + ((i * (ca + cb) + channel_offset + ch) * t + tt) * width;
          std::copy(s, s + f, d);
        }
      }
    }
  };
  copy(a, 0);
  copy(b, ca);
  return out;
}

// Gradient slice of channels [c0, c0 + c) cropped to `width` bins.
Tensor crop_channels(const Tensor& g, std::size_t c0, std::size_t c, std::size_t width) {
  const std::size_t n = g.dim(0), total = g.dim(1), t = g.dim(2), f = g.dim(3);
  Tensor out({n, c, t, width});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t tt = 0; tt < t; ++tt) {
        const double* s = g.data() + ((i * total + c0 + ch) * t + tt) * f;
        std::copy(s, s + width, out.data() + ((i * c + ch) * t + tt) * width);
      }
    }
  }
  return out;
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Conv2dShape down(std::size_t in, std::size_t out) { return {in, out, 2, 3, 1, 2}; }

class Ced final : public MaskNet {
 public:
  Ced(const ModelSpec& spec, Rng& init)
      : MaskNet(spec),
        enc1_(params_, "ced.conv1", down(1, ch(0)), init),
        enc2_(params_, "ced.conv2", down(ch(0), ch(1)), init),
        enc3_(params_, "ced.conv3", down(ch(1), ch(2)), init),
        enc4_(params_, "ced.conv4", down(ch(2), ch(3)), init),
        dec1_(params_, "ced.deconv1", down(ch(3), ch(2)), init),
        dec2_(params_, "ced.deconv2", down(2 * ch(2), ch(1)), init),
        dec3_(params_, "ced.deconv3", down(2 * ch(1), ch(0)), init),
        dec4_(params_, "ced.deconv4", down(2 * ch(0), 1), init),
        collapse_(params_, "ced.conv5", Conv2dShape{1, 1, spec.context_frames, 1, 1, 1}, init) {}

  std::vector<ShapeTrace> shape_trace() const override { return trace_; }

 protected:
  Tensor forward_impl(const Tensor& x, const ForwardContext& ctx) override {
    const std::size_t n = x.dim(0);
    trace_.clear();
    Tensor in = x.reshaped({n, 1, x.dim(1), x.dim(2)});
    trace("Reshape", in);
    e1_ = enc1_.forward(in, ctx);
    trace("Conv2d_1", e1_);
    e2_ = enc2_.forward(e1_, ctx);
    trace("Conv2d_2", e2_);
    e3_ = enc3_.forward(e2_, ctx);
    trace("Conv2d_3", e3_);
    const Tensor e4 = enc4_.forward(e3_, ctx);
    trace("Conv2d_4", e4);

    const Tensor d1 = dec1_.forward(e4, ctx);
    trace("Deconv2d_1", d1);
    d1_shape_ = d1.shape();
    const Tensor d2 = dec2_.forward(pad_concat(d1, e3_, e3_.dim(3)), ctx);
    trace("Deconv2d_2", d2);
    d2_shape_ = d2.shape();
    const Tensor d3 = dec3_.forward(pad_concat(d2, e2_, e2_.dim(3)), ctx);
    trace("Deconv2d_3", d3);
    d3_shape_ = d3.shape();
    const Tensor d4 = dec4_.forward(pad_concat(d3, e1_, e1_.dim(3)), ctx);
    trace("Deconv2d_4", d4);
    d4_shape_ = d4.shape();

    const Tensor d4p = pad_concat(d4, Tensor({n, 0, d4.dim(2), 0}), spec_.input_bins);
    const Tensor c5 = collapse_.forward(d4p, ctx);
    trace("Conv2d_5", c5);
    return sigmoid_.forward(c5.reshaped({n, spec_.output_bins}), ctx);
  }

  void backward_impl(const Tensor& g) override {
    const std::size_t n = g.dim(0);
    Tensor gs = sigmoid_.backward(g).reshaped({n, 1, 1, spec_.output_bins});
    Tensor gd4p = collapse_.backward(gs);
    Tensor gcat3 = dec4_.backward(crop_channels(gd4p, 0, 1, d4_shape_[3]));

    Tensor ge1 = crop_channels(gcat3, ch(0), ch(0), e1_.dim(3));
    Tensor gcat2 = dec3_.backward(crop_channels(gcat3, 0, ch(0), d3_shape_[3]));

    Tensor ge2 = crop_channels(gcat2, ch(1), ch(1), e2_.dim(3));
    Tensor gcat1 = dec2_.backward(crop_channels(gcat2, 0, ch(1), d2_shape_[3]));

    Tensor ge3 = crop_channels(gcat1, ch(2), ch(2), e3_.dim(3));
    Tensor ge4 = dec1_.backward(crop_channels(gcat1, 0, ch(2), d1_shape_[3]));

    add_into(ge3, enc4_.backward(ge4));
    add_into(ge2, enc3_.backward(ge3));
    add_into(ge1, enc2_.backward(ge2));
    enc1_.backward(ge1);
  }

 private:
  std::size_t ch(std::size_t i) const { return spec_.ced_channels[i]; }

  void trace(const char* name, const Tensor& t) {
    trace_.push_back({name, {t.dim(1), t.dim(2), t.dim(3)}});
  }

  ConvBlock<Conv2d> enc1_, enc2_, enc3_, enc4_;
  ConvBlock<ConvTranspose2d> dec1_, dec2_, dec3_, dec4_;
  Conv2d collapse_;
  ScaledSigmoid sigmoid_;

  Tensor e1_, e2_, e3_;
  std::vector<std::size_t> d1_shape_, d2_shape_, d3_shape_, d4_shape_;
  std::vector<ShapeTrace> trace_;
};

}  // namespace

std::unique_ptr<MaskNet> MaskNet::build(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng init(seed);
  switch (spec.kind) {
    case ModelKind::kFcnn: return std::make_unique<Fcnn>(spec, init);
    case ModelKind::kLstm: return std::make_unique<LstmNet>(spec, init);
    case ModelKind::kCed: return std::make_unique<Ced>(spec, init);
  }
  throw Error(ErrorKind::kInvalidConfig, "unsupported model kind");
}

}  // namespace maskpf::nn
