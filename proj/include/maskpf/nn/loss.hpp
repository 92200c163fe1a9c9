// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "maskpf/dsp.hpp"
#include "maskpf/nn/tensor.hpp"

namespace maskpf::nn {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d loss / d predicted mask
};

/// Mean over all elements of (ln max(Mt * C, eps) - ln max(Mp * C, eps))^2,
/// where Mt is the target mask, Mp the predicted mask and C the coded
/// magnitude. All three share the shape [N, bins].
LossResult loss_log_mse(const Tensor& predicted, const Tensor& target_mask, const Tensor& coded_mag,
                        double floor_eps = kLogFloor);

}  // namespace maskpf::nn
