// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/nn/params.hpp"

#include "maskpf/error.hpp"

namespace maskpf::nn {

Param& ParamStore::add(std::string name, std::vector<std::size_t> shape, ParamRole role) {
  if (find(name) != nullptr) throw Error(ErrorKind::kInvalidConfig, "duplicate parameter " + name);
  auto p = std::make_unique<Param>();
  p->name = std::move(name);
  p->role = role;
  p->value = Tensor(shape);
  if (role == ParamRole::kTrainable) {
    p->grad = Tensor(shape);
    p->adam_m = Tensor(shape);
    p->adam_v = Tensor(shape);
  }
  params_.push_back(std::move(p));
  return *params_.back();
}

Param* ParamStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Param* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::size_t ParamStore::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p->role == ParamRole::kTrainable) n += p->value.size();
  }
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) {
    if (p->role == ParamRole::kTrainable) p->grad.fill(0.0);
  }
}

std::vector<std::vector<double>> ParamStore::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value.values());
  return out;
}

void ParamStore::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw Error(ErrorKind::kInvalidInput, "snapshot size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != params_[i]->value.size()) {
      throw Error(ErrorKind::kInvalidInput, "snapshot shape mismatch for " + params_[i]->name);
    }
    params_[i]->value.values() = values[i];
  }
}

}  // namespace maskpf::nn
