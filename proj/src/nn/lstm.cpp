// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "maskpf/error.hpp"
#include "maskpf/kernels.hpp"
#include "maskpf/nn/layers.hpp"

namespace maskpf::nn {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void draw_mask(std::vector<double>& mask, std::size_t n, double rate, const ForwardContext& ctx) {
  mask.assign(n, 1.0);
  if (ctx.mode != Mode::kTrain || rate <= 0.0) return;
  if (ctx.rng == nullptr) throw Error(ErrorKind::kInvalidConfig, "dropout in train mode needs a generator");
  const double keep = 1.0 / (1.0 - rate);
  for (double& m : mask) m = ctx.rng->uniform() >= rate ? keep : 0.0;
}

}  // namespace

Lstm::Lstm(ParamStore& store, const std::string& name, std::size_t in, std::size_t hidden, bool return_sequences,
           double input_dropout, double recurrent_dropout, Rng& init)
    : in_(in),
      hidden_(hidden),
      return_sequences_(return_sequences),
      input_dropout_(input_dropout),
      recurrent_dropout_(recurrent_dropout) {
  kernel_ = &store.add(name + ".kernel", {4 * hidden, in});
  recurrent_ = &store.add(name + ".recurrent_kernel", {4 * hidden, hidden});
  bias_ = &store.add(name + ".bias", {4 * hidden});
  glorot_uniform(kernel_->value, in, 4 * hidden, init);
  glorot_uniform(recurrent_->value, hidden, 4 * hidden, init);
}

Tensor Lstm::forward(const Tensor& x, const ForwardContext& ctx) {
  if (x.rank() != 3 || x.dim(2) != in_) throw Error(ErrorKind::kInvalidInput, "Lstm input mismatch: " + x.shape_string());
  batch_ = x.dim(0);
  steps_ = x.dim(1);
  const std::size_t h4 = 4 * hidden_;
  x_in_.assign(batch_ * steps_ * in_, 0.0);
  h_prev_.assign(batch_ * steps_ * hidden_, 0.0);
  gates_.assign(batch_ * steps_ * h4, 0.0);
  cell_.assign(batch_ * (steps_ + 1) * hidden_, 0.0);
  mask_x_.clear();
  mask_h_.clear();

  Tensor y = return_sequences_ ? Tensor({batch_, steps_, hidden_}) : Tensor({batch_, hidden_});
  std::vector<double> h(hidden_), z(h4), mx, mh;
  for (std::size_t b = 0; b < batch_; ++b) {
    draw_mask(mx, in_, input_dropout_, ctx);
    draw_mask(mh, hidden_, recurrent_dropout_, ctx);
    mask_x_.insert(mask_x_.end(), mx.begin(), mx.end());
    mask_h_.insert(mask_h_.end(), mh.begin(), mh.end());
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t t = 0; t < steps_; ++t) {
      const std::size_t bt = b * steps_ + t;
      double* xin = x_in_.data() + bt * in_;
      const double* src = x.data() + bt * in_;
      for (std::size_t i = 0; i < in_; ++i) xin[i] = src[i] * mx[i];
      double* hp = h_prev_.data() + bt * hidden_;
      for (std::size_t i = 0; i < hidden_; ++i) hp[i] = h[i] * mh[i];

      for (std::size_t r = 0; r < h4; ++r) {
        z[r] = bias_->value[r] + kernels::dot(kernel_->value.data() + r * in_, xin, in_) +
               kernels::dot(recurrent_->value.data() + r * hidden_, hp, hidden_);
      }
      double* gt = gates_.data() + bt * h4;
      const double* c_prev = cell_.data() + (b * (steps_ + 1) + t) * hidden_;
      double* c_cur = cell_.data() + (b * (steps_ + 1) + t + 1) * hidden_;
      for (std::size_t u = 0; u < hidden_; ++u) {
        const double ig = sigmoid(z[u]);
        const double fg = sigmoid(z[hidden_ + u]);
        const double cg = std::tanh(z[2 * hidden_ + u]);
        const double og = sigmoid(z[3 * hidden_ + u]);
        gt[u] = ig;
        gt[hidden_ + u] = fg;
        gt[2 * hidden_ + u] = cg;
        gt[3 * hidden_ + u] = og;
        c_cur[u] = fg * c_prev[u] + ig * cg;
        h[u] = og * std::tanh(c_cur[u]);
      }
      if (return_sequences_) std::copy(h.begin(), h.end(), y.data() + bt * hidden_);
    }
    if (!return_sequences_) std::copy(h.begin(), h.end(), y.data() + b * hidden_);
  }
  return y;
}

Tensor Lstm::backward(const Tensor& g) {
  const std::size_t h4 = 4 * hidden_;
  Tensor gx({batch_, steps_, in_});
  std::vector<double> dh(hidden_), dc(hidden_), dz(h4), dh_prev(hidden_), dx(in_);
  for (std::size_t b = 0; b < batch_; ++b) {
    const double* mx = mask_x_.data() + b * in_;
    const double* mh = mask_h_.data() + b * hidden_;
    std::fill(dh.begin(), dh.end(), 0.0);
    std::fill(dc.begin(), dc.end(), 0.0);
    for (std::size_t t = steps_; t-- > 0;) {
      const std::size_t bt = b * steps_ + t;
      if (return_sequences_) {
        for (std::size_t u = 0; u < hidden_; ++u) dh[u] += g[bt * hidden_ + u];
      } else if (t + 1 == steps_) {
        for (std::size_t u = 0; u < hidden_; ++u) dh[u] += g[b * hidden_ + u];
      }
      const double* gt = gates_.data() + bt * h4;
      const double* c_prev = cell_.data() + (b * (steps_ + 1) + t) * hidden_;
      const double* c_cur = cell_.data() + (b * (steps_ + 1) + t + 1) * hidden_;
      for (std::size_t u = 0; u < hidden_; ++u) {
        const double ig = gt[u], fg = gt[hidden_ + u], cg = gt[2 * hidden_ + u], og = gt[3 * hidden_ + u];
        const double tc = std::tanh(c_cur[u]);
        const double d_o = dh[u] * tc;
        const double d_c = dh[u] * og * (1.0 - tc * tc) + dc[u];
        dz[u] = d_c * cg * ig * (1.0 - ig);
        dz[hidden_ + u] = d_c * c_prev[u] * fg * (1.0 - fg);
        dz[2 * hidden_ + u] = d_c * ig * (1.0 - cg * cg);
        dz[3 * hidden_ + u] = d_o * og * (1.0 - og);
        dc[u] = d_c * fg;
      }
      const double* xin = x_in_.data() + bt * in_;
      const double* hp = h_prev_.data() + bt * hidden_;
      std::fill(dx.begin(), dx.end(), 0.0);
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (std::size_t r = 0; r < h4; ++r) {
        const double d = dz[r];
        if (d == 0.0) continue;
        bias_->grad[r] += d;
        kernels::axpy(d, xin, kernel_->grad.data() + r * in_, in_);
        kernels::axpy(d, hp, recurrent_->grad.data() + r * hidden_, hidden_);
        kernels::axpy(d, kernel_->value.data() + r * in_, dx.data(), in_);
        kernels::axpy(d, recurrent_->value.data() + r * hidden_, dh_prev.data(), hidden_);
      }
      double* gxt = gx.data() + bt * in_;
      for (std::size_t i = 0; i < in_; ++i) gxt[i] = dx[i] * mx[i];
      for (std::size_t u = 0; u < hidden_; ++u) dh[u] = dh_prev[u] * mh[u];
    }
  }
  return gx;
}

}  // namespace maskpf::nn
