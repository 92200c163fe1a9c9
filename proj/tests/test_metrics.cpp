// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "maskpf/metrics.hpp"

using namespace maskpf;
using test::kind_of;

TEST_SUITE("metrics") {
  TEST_CASE("log spectral distance under scaling") {
    const auto x = test::noise(8000, 1);
    CHECK(log_spectral_distance(x, x) == 0.0);
    for (double c : {2.0, 0.5, 3.3}) {
      AudioBuffer y = x;
      for (double& s : y.samples) s *= c;
      CHECK(log_spectral_distance(x, y) == doctest::Approx(std::abs(20.0 * std::log10(c))).epsilon(1e-9));
    }
    AudioBuffer shorter = x;
    shorter.samples.pop_back();
    CHECK(kind_of([&] { log_spectral_distance(x, shorter); }) == ErrorKind::kInvalidInput);
  }

  TEST_CASE("log spectral distance matches a direct per-frame computation") {
    const auto x = test::noise(2048, 2);
    const auto y = test::noise(2048, 3);
    const auto w = sqrt_hann(512);
    double total = 0.0;
    const std::size_t frames = (2048 - 512) / 256 + 1;
    for (std::size_t t = 0; t < frames; ++t) {
      std::vector<double> a(512), b(512);
      for (std::size_t i = 0; i < 512; ++i) {
        a[i] = x.samples[t * 256 + i] * w[i];
        b[i] = y.samples[t * 256 + i] * w[i];
      }
      const auto fa = test::naive_dft(a), fb = test::naive_dft(b);
      double acc = 0.0;
      for (std::size_t k = 0; k < 205; ++k) {
        const double d = 20.0 * std::log10(std::abs(fa[k]) + 1e-12) - 20.0 * std::log10(std::abs(fb[k]) + 1e-12);
        acc += d * d;
      }
      total += std::sqrt(acc / 205.0);
    }
    CHECK(log_spectral_distance(x, y) == doctest::Approx(total / frames).epsilon(1e-9));
  }

  TEST_CASE("segmental SNR") {
    const auto x = test::noise(16000, 5);
    CHECK(segmental_snr(x, x) == kSegSnrMax);

    // Noise scaled per frame to exactly 10 dB below the reference.
    auto n = test::noise(16000, 6);
    AudioBuffer y = x;
    for (std::size_t f = 0; f < 16000 / 256; ++f) {
      const std::size_t b = f * 256, e = b + 256;
      const double scale = test::rms(x.samples, b, e) / test::rms(n.samples, b, e) / std::sqrt(10.0);
      for (std::size_t i = b; i < e; ++i) y.samples[i] += scale * n.samples[i];
    }
    CHECK(std::abs(segmental_snr(x, y) - 10.0) < 0.1);

    AudioBuffer silence;
    silence.samples.assign(4096, 0.0);
    CHECK(kind_of([&] { segmental_snr(silence, silence); }) == ErrorKind::kEmptyInput);
    AudioBuffer shorter = x;
    shorter.samples.resize(100);
    CHECK(kind_of([&] { segmental_snr(x, shorter); }) == ErrorKind::kInvalidInput);

    // Error of twice the signal gives -6.02 dB per frame.
    AudioBuffer inverted = x;
    for (double& s : inverted.samples) s = -s;
    CHECK(segmental_snr(x, inverted) == doctest::Approx(-20.0 * std::log10(2.0)).epsilon(1e-9));
    for (double& s : inverted.samples) s *= 3.0;
    CHECK(segmental_snr(x, inverted) == kSegSnrMin);
  }

  TEST_CASE("report means keep first-appearance order") {
    MetricReport r;
    r.rows = {{"a", "coded", 4.0, 10.0}, {"a", "model", 2.0, 12.0}, {"b", "coded", 6.0, 8.0}, {"b", "model", 3.0, 9.0}};
    const auto m = r.system_means();
    REQUIRE(m.size() == 2);
    CHECK(m[0].system == "coded");
    CHECK(m[0].utterance == "__mean__");
    CHECK(m[0].lsd_db == 5.0);
    CHECK(m[1].seg_snr_db == 10.5);
  }
}
