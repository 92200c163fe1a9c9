// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string_view>

#include "maskpf/kernels.hpp"

namespace maskpf::kernels {
namespace {

bool scalar_forced() {
  const char* env = std::getenv("MASKPF_SIMD");
  return env != nullptr && std::string_view(env) == "scalar";
}

#if defined(MASKPF_HAVE_AVX2)
bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable& select() {
  if (scalar_forced()) return scalar_table();
#if defined(MASKPF_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2_table();
#endif
#if defined(MASKPF_HAVE_NEON)
  return neon_table();
#endif
  return scalar_table();
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar_table()};
#if defined(MASKPF_HAVE_AVX2)
  if (cpu_has_avx2()) out.push_back(&avx2_table());
#endif
#if defined(MASKPF_HAVE_NEON)
  out.push_back(&neon_table());
#endif
  return out;
}

}  // namespace maskpf::kernels
