// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "maskpf/error.hpp"

namespace maskpf::nn {

LossResult loss_log_mse(const Tensor& predicted, const Tensor& target_mask, const Tensor& coded_mag,
                        double floor_eps) {
  if (predicted.shape() != target_mask.shape() || predicted.shape() != coded_mag.shape()) {
    throw Error(ErrorKind::kInvalidInput, "loss shape mismatch: " + predicted.shape_string() + ", " +
                                              target_mask.shape_string() + ", " + coded_mag.shape_string());
  }
  if (predicted.size() == 0) throw Error(ErrorKind::kEmptyInput, "empty loss batch");
  LossResult r;
  r.grad = Tensor(predicted.shape());
  const double inv_n = 1.0 / static_cast<double>(predicted.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double c = coded_mag[i];
    const double target = std::log(std::max(target_mask[i] * c, floor_eps));
    const double enhanced = predicted[i] * c;
    const double d = target - std::log(std::max(enhanced, floor_eps));
    sum += d * d;
    if (enhanced > floor_eps) r.grad[i] = -2.0 * d * inv_n / predicted[i];
  }
  r.value = sum * inv_n;
  return r;
}

}  // namespace maskpf::nn
