// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "maskpf/nn/tensor.hpp"

namespace maskpf::nn {

/// Trainable tensors are updated by ADAM; moving statistics (batch-norm
/// running mean/variance) by momentum during training-mode forward passes.
enum class ParamRole { kTrainable, kMovingStat };

struct Param {
  std::string name;
  ParamRole role = ParamRole::kTrainable;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
};

/// Named tensors in declaration order. Addresses are stable for the lifetime
/// of the store, so layers keep raw pointers into it.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Param& add(std::string name, std::vector<std::size_t> shape, ParamRole role = ParamRole::kTrainable);

  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return *params_[i]; }
  const Param& operator[](std::size_t i) const { return *params_[i]; }

  /// Every stored element, moving statistics included.
  std::size_t param_count() const;
  std::size_t trainable_count() const;

  void zero_grad();

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  /// Number of ADAM steps taken.
  std::uint64_t step = 0;

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

}  // namespace maskpf::nn
