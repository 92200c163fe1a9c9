// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "maskpf/mask.hpp"

using namespace maskpf;
using test::kind_of;

namespace {

Matrix filled(std::size_t rows, std::size_t cols, double v) { return Matrix(rows, cols, v); }

MaskMatrix mask_of(std::initializer_list<double> values) {
  MaskMatrix m{Matrix(1, values.size()), MaskKind::kIrm};
  std::copy(values.begin(), values.end(), m.values.data.begin());
  return m;
}

}  // namespace

TEST_SUITE("mask") {
  TEST_CASE("compute_irm") {
    CHECK(compute_irm(filled(1, 1, 1.0), filled(1, 1, 2.0), 1e-9).values(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(compute_irm(filled(1, 1, 0.3), filled(1, 1, 0.3), 0.0).values(0, 0) == 1.0);
    CHECK(compute_irm(filled(1, 1, 1.0), filled(1, 1, 0.0), 1e-9).values(0, 0) == doctest::Approx(1e9));
    CHECK(compute_irm(filled(1, 1, 1.0), filled(1, 1, 0.0), 1e-9).kind == MaskKind::kIrm);
    CHECK(kind_of([] { compute_irm(Matrix(2, 3), Matrix(3, 2), 1e-9); }) == ErrorKind::kInvalidInput);
  }

  TEST_CASE("bound_mask") {
    const auto b = bound_mask(mask_of({3.7, 0.4}), 2.0);
    CHECK(b.values(0, 0) == 2.0);
    CHECK(b.values(0, 1) == 0.4);
    CHECK(b.kind == MaskKind::kBounded);
    CHECK(bound_mask(mask_of({0.4}), 1.0).values(0, 0) == 0.4);
    CHECK(bound_mask(mask_of({1e9, 3.0}), kUnbounded).values.data == mask_of({1e9, 3.0}).values.data);
  }

  TEST_CASE("modified_mask keeps the boundary and replaces above alpha") {
    const MaskConfig cfg;
    const auto m = modified_mask(mask_of({2.0, 2.5, 0.3}), cfg);
    CHECK(m.values(0, 0) == 2.0);
    CHECK(m.values(0, 1) == 1.0);
    CHECK(m.values(0, 2) == 0.3);
    CHECK(m.kind == MaskKind::kModified);
    MaskConfig bad;
    bad.rho = 3.0;
    CHECK(kind_of([&] { modified_mask(mask_of({1.0}), bad); }) == ErrorKind::kInvalidConfig);
  }

  TEST_CASE("modified_target") {
    const Matrix coded = filled(2, 3, 4.0);
    MaskMatrix ones{filled(2, 3, 1.0), MaskKind::kModified};
    CHECK(modified_target(ones, coded).data == coded.data);
    MaskMatrix half{filled(2, 3, 0.5), MaskKind::kModified};
    CHECK(modified_target(half, coded)(1, 2) == 2.0);

    // With gamma = 0 the target reproduces the clean magnitude wherever IRM <= alpha.
    const auto p = test::surrogate_pair(3);
    const Matrix clean_mag = magnitudes(stft(p.clean));
    const Matrix coded_mag = magnitudes(stft(p.coded));
    MaskConfig cfg;
    cfg.gamma = 0.0;
    const auto irm = compute_irm(clean_mag, coded_mag, 0.0);
    const Matrix target = modified_target(modified_mask(irm, cfg), coded_mag);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < target.data.size(); ++i) {
      if (coded_mag.data[i] > 0.0 && irm.values.data[i] <= cfg.alpha) {
        CHECK(test::rel_err(target.data[i], clean_mag.data[i]) < 1e-9);
        ++checked;
      }
    }
    CHECK(checked > 1000);
  }

  TEST_CASE("apply_mask") {
    const auto x = test::noise(4096, 8);
    const Spectrogram coded = stft(x);
    MaskMatrix ones{filled(coded.frames, 205, 1.0), MaskKind::kPredicted};
    CHECK(apply_mask(ones, coded).data == coded.data);

    MaskMatrix m{filled(coded.frames, 205, 1.7), MaskKind::kPredicted};
    m.values(2, 10) = 0.0;
    const auto e = apply_mask(m, coded);
    CHECK(std::abs(e.at(2, 10)) == 0.0);
    for (std::size_t t = 0; t < coded.frames; ++t) {
      for (std::size_t k = 0; k < 257; ++k) {
        if (k >= 205) {
          CHECK(e.at(t, k) == coded.at(t, k));
        } else if (!(t == 2 && k == 10)) {
          CHECK(std::arg(e.at(t, k)) == doctest::Approx(std::arg(coded.at(t, k))).epsilon(1e-12));
          CHECK(std::abs(e.at(t, k)) == doctest::Approx(1.7 * std::abs(coded.at(t, k))).epsilon(1e-12));
        }
      }
    }

    MaskMatrix wrong{filled(coded.frames + 1, 205, 1.0), MaskKind::kPredicted};
    CHECK(kind_of([&] { apply_mask(wrong, coded); }) == ErrorKind::kInvalidInput);
  }

  TEST_CASE("oracle IRM inverts the coded magnitudes") {
    const auto p = test::surrogate_pair(5);
    const Spectrogram clean = stft(p.clean);
    const Spectrogram coded = stft(p.coded);
    const auto irm = compute_irm(magnitudes(clean), magnitudes(coded), 1e-9);
    const auto enhanced = apply_mask(irm, coded);
    for (std::size_t t = 0; t < coded.frames; ++t) {
      for (std::size_t k = 0; k < 205; ++k) {
        if (std::abs(coded.at(t, k)) >= 1e-3) {
          CHECK(test::rel_err(std::abs(enhanced.at(t, k)), std::abs(clean.at(t, k))) < 1e-6);
        }
      }
    }
  }

  TEST_CASE("mask_histogram buckets") {
    auto h = mask_histogram(mask_of({0.5, 1.5, 3.0, 7.0}));
    for (double f : h.fractions()) CHECK(f == 0.25);
    h = mask_histogram(mask_of({1.0, 1.0}));
    CHECK(h.fractions()[0] == 1.0);
    h = mask_histogram(mask_of({0.0, 1.0, 2.0, 5.0, 5.0000001}));
    CHECK(h.counts == std::array<std::size_t, 4>{2, 1, 1, 1});

    Rng rng(2);
    MaskMatrix r{Matrix(50, 205), MaskKind::kIrm};
    for (auto& v : r.values.data) v = std::exp(3.0 * rng.normal());
    const auto f = mask_histogram(r).fractions();
    CHECK(std::abs(f[0] + f[1] + f[2] + f[3] - 1.0) <= 1e-12);

    CHECK(kind_of([] { mask_histogram(MaskMatrix{}); }) == ErrorKind::kEmptyInput);
    CHECK(MaskHistogram::bucket_label(3) == "(5,inf)");
  }

  TEST_CASE("cepstrum substitution limits") {
    Rng rng(4);
    std::vector<double> coded(257), clean(257);
    for (std::size_t k = 0; k < 257; ++k) {
      coded[k] = std::exp(rng.normal());
      clean[k] = std::exp(rng.normal());
    }
    // Keeping no quefrencies returns the coded spectrum, keeping all returns the clean one.
    const auto none = cepstrum_substitute(coded, clean, 0);
    const auto all = cepstrum_substitute(coded, clean, 257);
    for (std::size_t k = 0; k < 257; ++k) {
      CHECK(test::rel_err(none[k], coded[k]) < 1e-9);
      CHECK(test::rel_err(all[k], clean[k]) < 1e-9);
    }
    // Quefrency 0 is the mean log-magnitude over the full (mirrored) spectrum.
    const auto mid = cepstrum_substitute(coded, clean, 64);
    auto mean_log = [](const std::vector<double>& m) {
      double s = std::log(m[0]) + std::log(m[256]);
      for (std::size_t k = 1; k < 256; ++k) s += 2.0 * std::log(m[k]);
      return s / 512.0;
    };
    CHECK(std::abs(mean_log(mid) - mean_log(clean)) < 1e-9);

    const auto p = test::surrogate_pair(6);
    const std::span<const double> cf(p.coded.samples.data() + 4096, 512);
    const std::span<const double> xf(p.clean.samples.data() + 4096, 512);
    CHECK(oracle_cepstrum_substitute(cf, xf).size() == 257);
  }

  TEST_CASE("oracle sweep ordering on a surrogate utterance") {
    const auto p = test::surrogate_pair(12);
    const std::vector<double> bounds{1.0, 2.0, 4.0, 10.0, kUnbounded};
    const auto rows = oracle_sweep(p.clean, p.coded, bounds);
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].system == "coded");
    CHECK(rows[1].system == "bound=1");
    CHECK(rows[5].system == "bound=inf");
    CHECK(rows[6].system == "cepstrum");
    for (std::size_t i = 1; i + 1 < 6; ++i) CHECK(rows[i + 1].lsd_spec_db <= rows[i].lsd_spec_db);
    CHECK(rows[2].lsd_spec_db < rows[1].lsd_spec_db);
    CHECK(rows[5].lsd_spec_db < 0.01);
    CHECK(rows[5].lsd_spec_db < rows[0].lsd_spec_db);
    CHECK(rows[6].lsd_spec_db > rows[2].lsd_spec_db);

    AudioBuffer longer = p.coded;
    longer.samples.resize(p.coded.size() + 600, 0.0);
    CHECK(kind_of([&] { oracle_sweep(p.clean, longer, bounds); }) == ErrorKind::kAlignment);
  }

  TEST_CASE("format_bound") {
    CHECK(format_bound(2.0) == "2");
    CHECK(format_bound(kUnbounded) == "inf");
  }
}
