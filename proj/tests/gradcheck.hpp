// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "maskpf/nn/layers.hpp"
#include "maskpf/nn/loss.hpp"
#include "maskpf/nn/models.hpp"

namespace maskpf::test {

struct GradReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

struct Probe {
  std::string name;
  double* values;
  const double* grad;
  std::size_t n;
};

// Relative error with a floor on the denominator so that entries whose true
// gradient is zero are judged on an absolute scale of 1e-6.
inline double grad_rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Central differences of `loss` against stored analytic gradients.
inline GradReport compare_gradients(const std::function<double()>& loss, const std::vector<Probe>& probes,
                                    double h = 1e-5) {
  GradReport r;
  for (const auto& p : probes) {
    for (std::size_t i = 0; i < p.n; ++i) {
      const double orig = p.values[i];
      p.values[i] = orig + h;
      const double up = loss();
      p.values[i] = orig - h;
      const double down = loss();
      p.values[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = grad_rel_err(p.grad[i], numeric);
      ++r.checked;
      if (err > r.max_rel_err) {
        r.max_rel_err = err;
        r.worst = p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

inline void add_param_probes(nn::ParamStore& store, std::vector<Probe>& probes) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    nn::Param& p = store[i];
    if (p.role == nn::ParamRole::kTrainable) probes.push_back({p.name, p.value.data(), p.grad.data(), p.value.size()});
  }
}

// Checks d/dx and d/dparams of sum(w * layer(x)) for a random weighting w.
inline GradReport check_layer(nn::Layer& layer, nn::ParamStore& store, nn::Tensor x, nn::Mode mode,
                              std::uint64_t seed) {
  auto run = [&] {
    Rng dropout(seed);
    return layer.forward(x, nn::ForwardContext{mode, &dropout, 0.9});
  };
  nn::Tensor y = run();
  nn::Tensor w(y.shape());
  Rng wr(seed + 1);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = wr.normal();
  store.zero_grad();
  const nn::Tensor gx = layer.backward(w);

  auto loss = [&] {
    const nn::Tensor out = run();
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * w[i];
    return s;
  };
  std::vector<Probe> probes{{"input", x.data(), gx.data(), x.size()}};
  add_param_probes(store, probes);
  return compare_gradients(loss, probes);
}

// Whole-network check through the log-MSE loss.
inline GradReport check_model(nn::MaskNet& net, std::uint64_t seed, std::size_t batch = 3) {
  const auto& spec = net.spec();
  Rng rng(seed);
  nn::Tensor x({batch, spec.context_frames, spec.input_bins});
  nn::Tensor target({batch, spec.output_bins}), coded({batch, spec.output_bins});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = rng.uniform(0.05, 2.0);
    coded[i] = rng.uniform(0.1, 3.0);
  }
  auto forward = [&] {
    Rng dropout(seed + 7);
    return net.forward(x, nn::ForwardContext{nn::Mode::kTrain, &dropout, 0.9});
  };
  net.params().zero_grad();
  const nn::LossResult l = nn::loss_log_mse(forward(), target, coded);
  net.backward(l.grad);

  std::vector<Probe> probes;
  add_param_probes(net.params(), probes);
  return compare_gradients([&] { return nn::loss_log_mse(forward(), target, coded).value; }, probes);
}

}  // namespace maskpf::test
