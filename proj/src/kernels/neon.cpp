// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0
//
// AArch64 NEON variants (2 doubles per register).

#include <arm_neon.h>

#include <cmath>

#include "maskpf/kernels.hpp"

namespace maskpf::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void adam_neon(double* p, double* m, double* v, const double* g, std::size_t n,
               const AdamCoefficients& c) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - c.beta1);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t eps = vdupq_n_f64(c.eps);
  const float64x2_t step = vdupq_n_f64(c.step_size);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gi = vld1q_f64(g + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, gi));
    const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(gi, gi)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(vdivq_f64(vi, bc2)), eps);
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), vmulq_f64(step, vdivq_f64(mi, denom))));
  }
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (; i < n; ++i) {
    const double gi = g[i];
    const double mi = c.beta1 * m[i] + one_minus_b1 * gi;
    const double vi = c.beta2 * v[i] + one_minus_b2 * (gi * gi);
    m[i] = mi;
    v[i] = vi;
    p[i] -= c.step_size * (mi / (std::sqrt(vi / c.bias_correction2) + c.eps));
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Isa::kNeon, dot_neon, axpy_neon, adam_neon};
  return table;
}

}  // namespace maskpf::kernels
