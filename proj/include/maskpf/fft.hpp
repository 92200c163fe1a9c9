// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace maskpf {

/// Real-input FFT of fixed length backed by FFTW. Plans are created with
/// FFTW_ESTIMATE, so results are reproducible on a given machine.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// out[k] = sum_n in[n] exp(-2 pi i k n / N), k = 0..N/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

  /// Inverse of forward including the 1/N factor. The imaginary parts of
  /// bins 0 and N/2 are ignored.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_;
  void* spectrum_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Per-thread cached transform of the given length.
RealFft& real_fft(std::size_t n);

}  // namespace maskpf
