// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>

#include "helpers.hpp"
#include "maskpf/kernels.hpp"

using namespace maskpf;

TEST_SUITE("kernels") {
  TEST_CASE("scalar table is always available and listed first") {
    const auto tables = kernels::available();
    REQUIRE(!tables.empty());
    CHECK(tables.front()->isa == kernels::Isa::kScalar);
    MESSAGE("active kernels: " << kernels::to_string(kernels::active().isa));
  }

  TEST_CASE("dot and axpy variants agree with the scalar reference") {
    Rng rng(11);
    const auto& ref = kernels::scalar_table();
    for (const auto* table : kernels::available()) {
      for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 64u, 1001u}) {
        std::vector<double> a(n), b(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
          a[i] = rng.normal();
          b[i] = rng.normal();
          y[i] = rng.normal();
        }
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
        CHECK(std::abs(table->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-12 * (mag + 1.0));

        auto y1 = y, y2 = y;
        table->axpy(0.37, a.data(), y1.data(), n);
        ref.axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(y2[i]) + 1.0));
      }
    }
  }

  TEST_CASE("adam variants are bit-identical") {
    Rng rng(5);
    const std::size_t n = 1037;
    std::vector<double> p(n), m(n), v(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.normal();
      m[i] = 0.1 * rng.normal();
      v[i] = rng.uniform();
      g[i] = rng.normal();
    }
    const kernels::AdamCoefficients c{1e-3 / (1 - 0.9 * 0.9), 0.9, 0.999, 1e-8, 1 - 0.999 * 0.999};
    auto p0 = p, m0 = m, v0 = v;
    kernels::scalar_table().adam(p0.data(), m0.data(), v0.data(), g.data(), n, c);
    for (const auto* table : kernels::available()) {
      auto p1 = p, m1 = m, v1 = v;
      table->adam(p1.data(), m1.data(), v1.data(), g.data(), n, c);
      CHECK(std::memcmp(p0.data(), p1.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(m0.data(), m1.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(v0.data(), v1.data(), n * sizeof(double)) == 0);
    }
  }
}
