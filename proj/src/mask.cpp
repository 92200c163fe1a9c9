// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/mask.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "maskpf/error.hpp"
#include "maskpf/fft.hpp"
#include "maskpf/metrics.hpp"

namespace maskpf {

void MaskConfig::validate() const {
  if (!(gamma >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "gamma must be non-negative");
  if (!(rho >= 0.0) || !(alpha >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "alpha and rho must be non-negative");
  if (rho > alpha) throw Error(ErrorKind::kInvalidConfig, "rho must not exceed alpha");
  if (!(bound > 0.0)) throw Error(ErrorKind::kInvalidConfig, "bound must be positive");
}

void MaskHistogram::add(double value) {
  std::size_t bucket = 3;
  if (value <= 1.0) {
    bucket = 0;
  } else if (value <= 2.0) {
    bucket = 1;
  } else if (value <= 5.0) {
    bucket = 2;
  }
  ++counts[bucket];
  ++total;
}

void MaskHistogram::merge(const MaskHistogram& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
}

std::array<double, 4> MaskHistogram::fractions() const {
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "histogram is empty");
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < 4; ++i) f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return f;
}

std::string MaskHistogram::bucket_label(std::size_t i) {
  static const char* labels[] = {"[0,1]", "(1,2]", "(2,5]", "(5,inf)"};
  return labels[i];
}

MaskMatrix compute_irm(const Matrix& clean_mag, const Matrix& coded_mag, double gamma) {
  if (!clean_mag.same_shape(coded_mag)) throw Error(ErrorKind::kInvalidInput, "clean/coded magnitude shapes differ");
  if (!(gamma >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "gamma must be non-negative");
  MaskMatrix m{Matrix(clean_mag.rows, clean_mag.cols), MaskKind::kIrm};
  for (std::size_t i = 0; i < clean_mag.data.size(); ++i) {
    const double denom = coded_mag.data[i] + gamma;
    // 0/0 only arises with gamma == 0 on silent bins; treat as unity gain.
    m.values.data[i] = denom > 0.0 ? clean_mag.data[i] / denom : 1.0;
  }
  return m;
}

MaskMatrix bound_mask(const MaskMatrix& m, double bound) {
  if (!(bound > 0.0)) throw Error(ErrorKind::kInvalidConfig, "bound must be positive");
  MaskMatrix out{m.values, MaskKind::kBounded};
  for (double& v : out.values.data) v = std::min(v, bound);
  return out;
}

MaskMatrix modified_mask(const MaskMatrix& irm, const MaskConfig& cfg) {
  cfg.validate();
  if (irm.kind != MaskKind::kIrm) throw Error(ErrorKind::kInvalidInput, "modified_mask expects an IRM");
  MaskMatrix out{irm.values, MaskKind::kModified};
  for (double& v : out.values.data) {
    if (v > cfg.alpha) v = cfg.rho;
  }
  return out;
}

Matrix modified_target(const MaskMatrix& m, const Matrix& coded_mag) {
  if (!m.values.same_shape(coded_mag)) throw Error(ErrorKind::kInvalidInput, "mask/magnitude shapes differ");
  Matrix target(coded_mag.rows, coded_mag.cols);
  for (std::size_t i = 0; i < target.data.size(); ++i) target.data[i] = m.values.data[i] * coded_mag.data[i];
  return target;
}

Spectrogram apply_mask(const MaskMatrix& m, const Spectrogram& coded) {
  if (m.values.rows != coded.frames) {
    throw Error(ErrorKind::kInvalidInput, "mask has " + std::to_string(m.values.rows) + " frames, spectrogram " +
                                              std::to_string(coded.frames));
  }
  if (m.values.cols > coded.config.n_bins) throw Error(ErrorKind::kInvalidInput, "mask wider than spectrogram");
  Spectrogram out = coded;
  for (std::size_t t = 0; t < coded.frames; ++t) {
    for (std::size_t k = 0; k < m.values.cols; ++k) out.at(t, k) *= m.values(t, k);
  }
  return out;
}

MaskHistogram mask_histogram(const MaskMatrix& m) {
  if (m.values.empty()) throw Error(ErrorKind::kEmptyInput, "mask matrix is empty");
  MaskHistogram h;
  for (double v : m.values.data) h.add(v);
  return h;
}

std::vector<double> cepstrum_substitute(std::span<const double> coded_mag, std::span<const double> clean_mag,
                                        std::size_t k_keep) {
  if (coded_mag.size() != clean_mag.size() || coded_mag.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "magnitude spectra must have equal length");
  }
  const std::size_t n = (coded_mag.size() - 1) * 2;
  if (k_keep > n) throw Error(ErrorKind::kInvalidInput, "k_keep exceeds cepstrum length");
  auto coded_c = cepstrum_from_magnitude(coded_mag);
  const auto clean_c = cepstrum_from_magnitude(clean_mag);
  for (std::size_t q = 0; q < k_keep; ++q) {
    coded_c[q] = clean_c[q];
    // Mirror quefrency keeps the cepstrum even, hence the spectrum real.
    if (q > 0) coded_c[n - q] = clean_c[n - q];
  }
  auto logmag = log_magnitude_from_cepstrum(coded_c);
  for (double& v : logmag) v = std::exp(v);
  return logmag;
}

std::vector<double> oracle_cepstrum_substitute(std::span<const double> coded_frame,
                                               std::span<const double> clean_frame, std::size_t k_keep) {
  constexpr std::size_t kLen = 512;
  if (coded_frame.size() != kLen || clean_frame.size() != kLen) {
    throw Error(ErrorKind::kInvalidInput, "oracle cepstrum frames must have 512 samples");
  }
  const auto w = sqrt_hann(kLen);
  auto spectrum_of = [&](std::span<const double> frame) {
    std::vector<double> x(kLen);
    for (std::size_t i = 0; i < kLen; ++i) x[i] = frame[i] * w[i];
    std::vector<std::complex<double>> spec(kLen / 2 + 1);
    real_fft(kLen).forward(x, spec);
    std::vector<double> mag(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) mag[k] = std::abs(spec[k]);
    return mag;
  };
  return cepstrum_substitute(spectrum_of(coded_frame), spectrum_of(clean_frame), k_keep);
}

std::string format_bound(double bound) {
  if (std::isinf(bound)) return "inf";
  std::ostringstream os;
  os << bound;
  return os.str();
}

namespace {

OracleRow score(std::string system, double bound, const Spectrogram& clean_spec, const AudioBuffer& clean,
                const Spectrogram& enhanced) {
  OracleRow row;
  row.system = std::move(system);
  row.bound = bound;
  row.lsd_spec_db = log_spectral_distance(clean_spec, enhanced);
  AudioBuffer resynth = istft(enhanced, enhanced.config);
  AudioBuffer ref = clean;
  ref.samples.resize(resynth.size());
  row.lsd_resynth_db = log_spectral_distance(ref, resynth);
  row.seg_snr_db = segmental_snr(ref, resynth);
  return row;
}

}  // namespace

std::vector<OracleRow> oracle_sweep(const AudioBuffer& clean, const AudioBuffer& coded,
                                    std::span<const double> bounds, const OracleSweepOptions& opts) {
  opts.mask.validate();
  const StftConfig cfg;
  const std::size_t diff = clean.size() > coded.size() ? clean.size() - coded.size() : coded.size() - clean.size();
  if (diff > cfg.frame_len) {
    throw Error(ErrorKind::kAlignment, "clean/coded lengths differ by " + std::to_string(diff) + " samples");
  }
  const std::size_t len = std::min(clean.size(), coded.size());
  AudioBuffer x = clean, y = coded;
  x.samples.resize(len);
  y.samples.resize(len);

  const Spectrogram clean_spec = stft(x, cfg);
  const Spectrogram coded_spec = stft(y, cfg);
  const Matrix clean_mag = magnitudes(clean_spec);
  const Matrix coded_mag = magnitudes(coded_spec);
  const MaskMatrix irm = compute_irm(clean_mag, coded_mag, opts.mask.gamma);

  std::vector<OracleRow> rows;
  rows.push_back(score("coded", 0.0, clean_spec, x, coded_spec));
  for (double b : bounds) {
    const Spectrogram enhanced = apply_mask(bound_mask(irm, b), coded_spec);
    rows.push_back(score("bound=" + format_bound(b), b, clean_spec, x, enhanced));
  }
  if (opts.include_cepstrum) {
    const Matrix clean_full = magnitudes(clean_spec, cfg.n_bins);
    const Matrix coded_full = magnitudes(coded_spec, cfg.n_bins);
    Spectrogram enhanced = coded_spec;
    for (std::size_t t = 0; t < coded_spec.frames; ++t) {
      const auto mag = cepstrum_substitute(coded_full.row(t), clean_full.row(t), opts.cepstrum_keep);
      for (std::size_t k = 0; k < cfg.n_bins; ++k) {
        const auto c = coded_spec.at(t, k);
        const double a = std::abs(c);
        enhanced.at(t, k) = a > 0.0 ? c * (mag[k] / a) : std::complex<double>(mag[k], 0.0);
      }
    }
    rows.push_back(score("cepstrum", 0.0, clean_spec, x, enhanced));
  }
  return rows;
}

}  // namespace maskpf
