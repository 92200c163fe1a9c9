// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "maskpf/audio.hpp"
#include "maskpf/dsp.hpp"
#include "maskpf/matrix.hpp"

namespace maskpf {

enum class MaskKind { kIrm, kBounded, kModified, kPredicted };

struct MaskMatrix {
  Matrix values;  // frames x processed bins
  MaskKind kind = MaskKind::kIrm;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct MaskConfig {
  double gamma = 1e-9;  // division guard of the ratio mask
  double alpha = 2.0;   // modified-mask threshold
  double rho = 1.0;     // replacement value above alpha
  double bound = kUnbounded;

  /// gamma >= 0 (0 only for algebraic checks), 0 <= rho <= alpha.
  void validate() const;
};

/// Fractions of mask values in [0,1], (1,2], (2,5], (5,inf).
struct MaskHistogram {
  static constexpr std::array<double, 5> kEdges{0.0, 1.0, 2.0, 5.0, std::numeric_limits<double>::infinity()};

  std::array<std::size_t, 4> counts{};
  std::size_t total = 0;

  void add(double value);
  void merge(const MaskHistogram& other);
  std::array<double, 4> fractions() const;
  static std::string bucket_label(std::size_t i);
};

/// IRM = |X| / (|X~| + gamma), elementwise.
MaskMatrix compute_irm(const Matrix& clean_mag, const Matrix& coded_mag, double gamma);

MaskMatrix bound_mask(const MaskMatrix& m, double bound);

/// IRM where IRM <= alpha, rho elsewhere.
MaskMatrix modified_mask(const MaskMatrix& irm, const MaskConfig& cfg);

/// |X_bar| = M~ * |X~|.
Matrix modified_target(const MaskMatrix& m, const Matrix& coded_mag);

/// Scales the processed band of `coded` by the mask; bins at and above the
/// mask width pass through. Phase is never touched.
Spectrogram apply_mask(const MaskMatrix& m, const Spectrogram& coded);

MaskHistogram mask_histogram(const MaskMatrix& m);

/// Replaces the lowest `k_keep` quefrencies (and their mirror images) of the
/// coded magnitude spectrum's cepstrum with the clean ones and returns the
/// resulting N/2 + 1 bin magnitude spectrum.
std::vector<double> cepstrum_substitute(std::span<const double> coded_mag, std::span<const double> clean_mag,
                                        std::size_t k_keep = 64);

/// Same as cepstrum_substitute on two aligned 512-sample time frames
/// (sqrt-Hann analysis window).
std::vector<double> oracle_cepstrum_substitute(std::span<const double> coded_frame,
                                               std::span<const double> clean_frame, std::size_t k_keep = 64);

struct OracleRow {
  std::string system;  // "coded", "cepstrum", "bound=<b>"
  double bound = 0.0;  // 0 for non-mask rows
  double lsd_spec_db = 0.0;     // enhanced spectrogram vs clean spectrogram
  double lsd_resynth_db = 0.0;  // after iSTFT, re-analysed
  double seg_snr_db = 0.0;
};

struct OracleSweepOptions {
  MaskConfig mask;
  bool include_cepstrum = true;
  std::size_t cepstrum_keep = 64;
};

/// Oracle experiment for one aligned pair: the coded baseline, the bounded
/// IRM for each bound, and optionally the cepstrum-substitution baseline.
/// Lengths may differ by at most one frame; both are truncated to the shorter.
std::vector<OracleRow> oracle_sweep(const AudioBuffer& clean, const AudioBuffer& coded,
                                    std::span<const double> bounds, const OracleSweepOptions& opts = {});

std::string format_bound(double bound);

}  // namespace maskpf
