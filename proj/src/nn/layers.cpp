// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "maskpf/error.hpp"
#include "maskpf/kernels.hpp"

namespace maskpf::nn {
namespace {

void expect_rank(const Tensor& x, std::size_t rank, const char* layer) {
  if (x.rank() != rank) {
    throw Error(ErrorKind::kInvalidInput,
                std::string(layer) + " expects rank " + std::to_string(rank) + ", got " + x.shape_string());
  }
}

}  // namespace

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------- Dense

Dense::Dense(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& init)
    : in_(in), out_(out) {
  weight_ = &store.add(name + ".weight", {out, in});
  bias_ = &store.add(name + ".bias", {out});
  glorot_uniform(weight_->value, in, out, init);
}

Tensor Dense::forward(const Tensor& x, const ForwardContext&) {
  expect_rank(x, 2, "Dense");
  if (x.dim(1) != in_) throw Error(ErrorKind::kInvalidInput, "Dense input width mismatch: " + x.shape_string());
  input_ = x;
  const std::size_t n = x.dim(0);
  Tensor y({n, out_});
  const double* w = weight_->value.data();
  for (std::size_t b = 0; b < n; ++b) {
    const double* xb = x.data() + b * in_;
    double* yb = y.data() + b * out_;
    for (std::size_t j = 0; j < out_; ++j) yb[j] = bias_->value[j] + kernels::dot(w + j * in_, xb, in_);
  }
  return y;
}

Tensor Dense::backward(const Tensor& g) {
  const std::size_t n = input_.dim(0);
  Tensor gx({n, in_});
  const double* w = weight_->value.data();
  double* gw = weight_->grad.data();
  for (std::size_t b = 0; b < n; ++b) {
    const double* xb = input_.data() + b * in_;
    double* gxb = gx.data() + b * in_;
    for (std::size_t j = 0; j < out_; ++j) {
      const double gj = g[b * out_ + j];
      if (gj == 0.0) continue;
      bias_->grad[j] += gj;
      kernels::axpy(gj, xb, gw + j * in_, in_);
      kernels::axpy(gj, w + j * in_, gxb, in_);
    }
  }
  return gx;
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(ParamStore& store, const std::string& name, std::size_t channels, double eps)
    : channels_(channels), eps_(eps) {
  gamma_ = &store.add(name + ".gamma", {channels});
  beta_ = &store.add(name + ".beta", {channels});
  moving_mean_ = &store.add(name + ".moving_mean", {channels}, ParamRole::kMovingStat);
  moving_var_ = &store.add(name + ".moving_var", {channels}, ParamRole::kMovingStat);
  gamma_->value.fill(1.0);
  moving_var_->value.fill(1.0);
}

Tensor BatchNorm::forward(const Tensor& x, const ForwardContext& ctx) {
  if (x.rank() < 2 || x.dim(1) != channels_) {
    throw Error(ErrorKind::kInvalidInput, "BatchNorm channel mismatch: " + x.shape_string());
  }
  mode_ = ctx.mode;
  const std::size_t n = x.dim(0);
  const std::size_t inner = x.size() / (n * channels_);
  const double count = static_cast<double>(n * inner);
  xhat_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0);
  Tensor y(x.shape());

  for (std::size_t c = 0; c < channels_; ++c) {
    double mean, var;
    if (ctx.mode == Mode::kTrain) {
      double sum = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const double* p = x.data() + (b * channels_ + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) sum += p[i];
      }
      mean = sum / count;
      double sq = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const double* p = x.data() + (b * channels_ + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = sq / count;
      const double m = ctx.bn_momentum;
      moving_mean_->value[c] = m * moving_mean_->value[c] + (1.0 - m) * mean;
      moving_var_->value[c] = m * moving_var_->value[c] + (1.0 - m) * var;
    } else {
      mean = moving_mean_->value[c];
      var = moving_var_->value[c];
    }
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv;
    const double g = gamma_->value[c], be = beta_->value[c];
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * channels_ + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double xh = (x[off + i] - mean) * inv;
        xhat_[off + i] = xh;
        y[off + i] = g * xh + be;
      }
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& g) {
  const std::size_t n = xhat_.dim(0);
  const std::size_t inner = xhat_.size() / (n * channels_);
  const double count = static_cast<double>(n * inner);
  Tensor gx(xhat_.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * channels_ + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        sum_g += g[off + i];
        sum_gx += g[off + i] * xhat_[off + i];
      }
    }
    gamma_->grad[c] += sum_gx;
    beta_->grad[c] += sum_g;
    const double scale = gamma_->value[c] * inv_std_[c];
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * channels_ + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        if (mode_ == Mode::kTrain) {
          gx[off + i] = scale * (g[off + i] - sum_g / count - xhat_[off + i] * sum_gx / count);
        } else {
          gx[off + i] = scale * g[off + i];
        }
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------- activations

Tensor Relu::forward(const Tensor& x, const ForwardContext&) {
  input_ = x;
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor Relu::backward(const Tensor& g) {
  Tensor gx = g;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (!(input_[i] > 0.0)) gx[i] = 0.0;
  }
  return gx;
}

Tensor Elu::forward(const Tensor& x, const ForwardContext&) {
  input_ = x;
  output_ = x;
  for (double& v : output_.values()) v = v > 0.0 ? v : alpha_ * std::expm1(v);
  return output_;
}

Tensor Elu::backward(const Tensor& g) {
  Tensor gx = g;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (!(input_[i] > 0.0)) gx[i] *= output_[i] + alpha_;
  }
  return gx;
}

Tensor ScaledSigmoid::forward(const Tensor& x, const ForwardContext&) {
  input_ = x;
  sigma_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = std::clamp(x[i], -kClamp, kClamp);
    const double s = 1.0 / (1.0 + std::exp(-z));
    sigma_[i] = s;
    y[i] = scale_ * s;
  }
  return y;
}

Tensor ScaledSigmoid::backward(const Tensor& g) {
  Tensor gx(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(input_[i]) >= kClamp) continue;
    const double s = sigma_[i];
    gx[i] = g[i] * scale_ * s * (1.0 - s);
  }
  return gx;
}

Tensor Dropout::forward(const Tensor& x, const ForwardContext& ctx) {
  if (ctx.mode != Mode::kTrain || rate_ <= 0.0) {
    mask_.assign(x.size(), 1.0);
    return x;
  }
  if (ctx.rng == nullptr) throw Error(ErrorKind::kInvalidConfig, "dropout in train mode needs a generator");
  const double keep = 1.0 / (1.0 - rate_);
  mask_.resize(x.size());
  Tensor y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = ctx.rng->uniform() >= rate_ ? keep : 0.0;
    y[i] *= mask_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& g) {
  Tensor gx = g;
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= mask_[i];
  return gx;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(ParamStore& store, const std::string& name, const Conv2dShape& shape, Rng& init) : s_(shape) {
  const std::size_t k = s_.in_channels * s_.kernel_h * s_.kernel_w;
  weight_ = &store.add(name + ".weight", {s_.out_channels, k});
  bias_ = &store.add(name + ".bias", {s_.out_channels});
  glorot_uniform(weight_->value, k, s_.out_channels * s_.kernel_h * s_.kernel_w, init);
}

Tensor Conv2d::forward(const Tensor& x, const ForwardContext&) {
  expect_rank(x, 4, "Conv2d");
  if (x.dim(1) != s_.in_channels || x.dim(2) < s_.kernel_h || x.dim(3) < s_.kernel_w) {
    throw Error(ErrorKind::kInvalidInput, "Conv2d input mismatch: " + x.shape_string());
  }
  in_shape_ = x.shape();
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
  out_h_ = out_size(h, s_.kernel_h, s_.stride_h);
  out_w_ = out_size(w, s_.kernel_w, s_.stride_w);
  const std::size_t positions = out_h_ * out_w_;
  const std::size_t k = s_.in_channels * s_.kernel_h * s_.kernel_w;
  cols_.assign(n * positions * k, 0.0);
  Tensor y({n, s_.out_channels, out_h_, out_w_});

  for (std::size_t b = 0; b < n; ++b) {
    double* cols = cols_.data() + b * positions * k;
    const double* xb = x.data() + b * s_.in_channels * h * w;
    for (std::size_t oh = 0; oh < out_h_; ++oh) {
      for (std::size_t ow = 0; ow < out_w_; ++ow) {
        double* col = cols + (oh * out_w_ + ow) * k;
        for (std::size_t ci = 0; ci < s_.in_channels; ++ci) {
          for (std::size_t i = 0; i < s_.kernel_h; ++i) {
            const double* src = xb + (ci * h + oh * s_.stride_h + i) * w + ow * s_.stride_w;
            for (std::size_t j = 0; j < s_.kernel_w; ++j) *col++ = src[j];
          }
        }
      }
    }
    double* yb = y.data() + b * s_.out_channels * positions;
    for (std::size_t co = 0; co < s_.out_channels; ++co) {
      const double* wrow = weight_->value.data() + co * k;
      for (std::size_t p = 0; p < positions; ++p) {
        yb[co * positions + p] = bias_->value[co] + kernels::dot(wrow, cols + p * k, k);
      }
    }
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& g) {
  const std::size_t n = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
  const std::size_t positions = out_h_ * out_w_;
  const std::size_t k = s_.in_channels * s_.kernel_h * s_.kernel_w;
  Tensor gx(in_shape_);
  std::vector<double> gcol(positions * k);
  for (std::size_t b = 0; b < n; ++b) {
    const double* cols = cols_.data() + b * positions * k;
    const double* gb = g.data() + b * s_.out_channels * positions;
    std::fill(gcol.begin(), gcol.end(), 0.0);
    for (std::size_t co = 0; co < s_.out_channels; ++co) {
      const double* wrow = weight_->value.data() + co * k;
      double* gwrow = weight_->grad.data() + co * k;
      for (std::size_t p = 0; p < positions; ++p) {
        const double gv = gb[co * positions + p];
        if (gv == 0.0) continue;
        bias_->grad[co] += gv;
        kernels::axpy(gv, cols + p * k, gwrow, k);
        kernels::axpy(gv, wrow, gcol.data() + p * k, k);
      }
    }
    double* gxb = gx.data() + b * s_.in_channels * h * w;
    for (std::size_t oh = 0; oh < out_h_; ++oh) {
      for (std::size_t ow = 0; ow < out_w_; ++ow) {
        const double* col = gcol.data() + (oh * out_w_ + ow) * k;
        for (std::size_t ci = 0; ci < s_.in_channels; ++ci) {
          for (std::size_t i = 0; i < s_.kernel_h; ++i) {
            double* dst = gxb + (ci * h + oh * s_.stride_h + i) * w + ow * s_.stride_w;
            for (std::size_t j = 0; j < s_.kernel_w; ++j) dst[j] += *col++;
          }
        }
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(ParamStore& store, const std::string& name, const Conv2dShape& shape, Rng& init)
    : s_(shape) {
  const std::size_t k = s_.out_channels * s_.kernel_h * s_.kernel_w;
  weight_ = &store.add(name + ".weight", {s_.in_channels, k});
  bias_ = &store.add(name + ".bias", {s_.out_channels});
  glorot_uniform(weight_->value, s_.in_channels * s_.kernel_h * s_.kernel_w, k, init);
}

Tensor ConvTranspose2d::forward(const Tensor& x, const ForwardContext&) {
  expect_rank(x, 4, "ConvTranspose2d");
  if (x.dim(1) != s_.in_channels) {
    throw Error(ErrorKind::kInvalidInput, "ConvTranspose2d input mismatch: " + x.shape_string());
  }
  input_ = x;
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
  out_h_ = out_size(h, s_.kernel_h, s_.stride_h);
  out_w_ = out_size(w, s_.kernel_w, s_.stride_w);
  const std::size_t k = s_.out_channels * s_.kernel_h * s_.kernel_w;
  const std::size_t plane = h * w;
  const std::size_t out_plane = out_h_ * out_w_;
  Tensor y({n, s_.out_channels, out_h_, out_w_});
  std::vector<double> col(k);

  for (std::size_t b = 0; b < n; ++b) {
    const double* xb = x.data() + b * s_.in_channels * plane;
    double* yb = y.data() + b * s_.out_channels * out_plane;
    for (std::size_t co = 0; co < s_.out_channels; ++co) {
      std::fill(yb + co * out_plane, yb + (co + 1) * out_plane, bias_->value[co]);
    }
    for (std::size_t ih = 0; ih < h; ++ih) {
      for (std::size_t iw = 0; iw < w; ++iw) {
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t ci = 0; ci < s_.in_channels; ++ci) {
          const double xv = xb[ci * plane + ih * w + iw];
          if (xv != 0.0) kernels::axpy(xv, weight_->value.data() + ci * k, col.data(), k);
        }
        const double* c = col.data();
        for (std::size_t co = 0; co < s_.out_channels; ++co) {
          for (std::size_t i = 0; i < s_.kernel_h; ++i) {
            double* dst = yb + co * out_plane + (ih * s_.stride_h + i) * out_w_ + iw * s_.stride_w;
            for (std::size_t j = 0; j < s_.kernel_w; ++j) dst[j] += *c++;
          }
        }
      }
    }
  }
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& g) {
  const std::size_t n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
  const std::size_t k = s_.out_channels * s_.kernel_h * s_.kernel_w;
  const std::size_t plane = h * w;
  const std::size_t out_plane = out_h_ * out_w_;
  Tensor gx(input_.shape());
  std::vector<double> gcol(k);
  for (std::size_t b = 0; b < n; ++b) {
    const double* gb = g.data() + b * s_.out_channels * out_plane;
    for (std::size_t co = 0; co < s_.out_channels; ++co) {
      double s = 0.0;
      for (std::size_t i = 0; i < out_plane; ++i) s += gb[co * out_plane + i];
      bias_->grad[co] += s;
    }
    const double* xb = input_.data() + b * s_.in_channels * plane;
    double* gxb = gx.data() + b * s_.in_channels * plane;
    for (std::size_t ih = 0; ih < h; ++ih) {
      for (std::size_t iw = 0; iw < w; ++iw) {
        double* c = gcol.data();
        for (std::size_t co = 0; co < s_.out_channels; ++co) {
          for (std::size_t i = 0; i < s_.kernel_h; ++i) {
            const double* src = gb + co * out_plane + (ih * s_.stride_h + i) * out_w_ + iw * s_.stride_w;
            for (std::size_t j = 0; j < s_.kernel_w; ++j) *c++ = src[j];
          }
        }
        const std::size_t p = ih * w + iw;
        for (std::size_t ci = 0; ci < s_.in_channels; ++ci) {
          gxb[ci * plane + p] = kernels::dot(weight_->value.data() + ci * k, gcol.data(), k);
          const double xv = xb[ci * plane + p];
          if (xv != 0.0) kernels::axpy(xv, gcol.data(), weight_->grad.data() + ci * k, k);
        }
      }
    }
  }
  return gx;
}

}  // namespace maskpf::nn
