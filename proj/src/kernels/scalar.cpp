// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "maskpf/kernels.hpp"

namespace maskpf::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void adam_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                 const AdamCoefficients& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    const double mi = c.beta1 * m[i] + one_minus_b1 * gi;
    const double vi = c.beta2 * v[i] + one_minus_b2 * (gi * gi);
    m[i] = mi;
    v[i] = vi;
    const double denom = std::sqrt(vi / c.bias_correction2) + c.eps;
    p[i] -= c.step_size * (mi / denom);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, dot_scalar, axpy_scalar, adam_scalar};
  return table;
}

}  // namespace maskpf::kernels
