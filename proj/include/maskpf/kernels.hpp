// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace maskpf::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct AdamCoefficients {
  double step_size;  // lr / (1 - beta1^t)
  double beta1;
  double beta2;
  double eps;
  double bias_correction2;  // 1 - beta2^t
};

/// Inner-loop kernels shared by the DSP and NN code. Every variant computes
/// the same function; reductions may differ from the scalar reference in the
/// last bits because lanes are summed in a different order.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // ADAM moment update and parameter step. Elementwise, no fused
  // multiply-add: bit-identical across variants.
  void (*adam)(double* param, double* m, double* v, const double* grad, std::size_t n,
               const AdamCoefficients& c);
};

/// Variant chosen once per process: the widest ISA the CPU supports, unless
/// MASKPF_SIMD=scalar is set in the environment.
const KernelTable& active();

/// All variants compiled into this binary and runnable on this CPU.
std::vector<const KernelTable*> available();

const KernelTable& scalar_table();
#if defined(MASKPF_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(MASKPF_HAVE_NEON)
const KernelTable& neon_table();
#endif

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

}  // namespace maskpf::kernels
