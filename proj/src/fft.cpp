// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "maskpf/error.hpp"

namespace maskpf {
namespace {

// The FFTW planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorKind::kInvalidConfig, "FFT length must be even and >= 2");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spectrum_ = spec;
  const int len = static_cast<int>(n);
  forward_plan_ = fftw_plan_dft_r2c_1d(len, real_, spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(len, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.size() != n_ || out.size() != bins()) throw Error(ErrorKind::kInvalidInput, "FFT buffer size mismatch");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* spec = static_cast<const fftw_complex*>(spectrum_);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != n_) throw Error(ErrorKind::kInvalidInput, "FFT buffer size mismatch");
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  for (std::size_t k = 0; k < bins(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  spec[0][1] = 0.0;
  spec[n_ / 2][1] = 0.0;
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

RealFft& real_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace maskpf
