// Copyright 2026 The mpq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpq/uniform.hpp"

#include <random>

#include "doctest.h"

using namespace mpq;

TEST_CASE("clamp saturates at both ends") {
  CHECK(mpq::clamp(0.5, 0.0, 1.0) == 0.5);
  CHECK(mpq::clamp(-3.0, 0.0, 1.0) == 0.0);
  CHECK(mpq::clamp(7.0, 0.0, 1.0) == 1.0);
  CHECK(mpq::clamp(2.0f, 1.0f, 1.0f) == 1.0f);
}

TEST_CASE("quantize_uniform on a unit range") {
  const auto q8 = UniformQuantParams<double>::make(0, 1, 8);
  CHECK(quantize_uniform(0.0, q8) == 0);
  CHECK(quantize_uniform(1.0, q8) == 255);
  CHECK(quantize_uniform(5.0, q8) == 255);
  CHECK(quantize_uniform(-5.0, q8) == 0);
  // s = 1/7, 0.4 / s = 2.8
  const auto q3 = UniformQuantParams<double>::make(0, 1, 3);
  CHECK(q3.scale() == doctest::Approx(1.0 / 7));
  CHECK(quantize_uniform(0.4, q3) == 3);
}

TEST_CASE("ties round away from zero") {
  const auto q = UniformQuantParams<double>::make(-4, 4, 3, 0);  // s = 8/7
  CHECK(quantize_uniform(0.5 * 8 / 7, q) == 1);
  CHECK(quantize_uniform(-0.5 * 8 / 7, q) == -1);
}

TEST_CASE("zero range is rejected by quantize_uniform") {
  const auto q = UniformQuantParams<double>::make(1, 1, 8);
  CHECK(q.scale() == 0);
  CHECK_THROWS_AS(quantize_uniform(1.0, q), Error);
  CHECK_THROWS_AS(UniformQuantParams<double>::make(1, 0, 8), Error);
  CHECK_THROWS_AS(UniformQuantParams<double>::make(0, 1, 0), Error);
}

TEST_CASE("dequantize_uniform inverts the grid") {
  const auto q = UniformQuantParams<double>::make(0, 1, 8);
  CHECK(dequantize_uniform(0, q) == 0.0);
  CHECK(dequantize_uniform(255, q) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("round-trip error is at most half a step") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lo(-2, 0), width(1e-3, 3), x(-6, 6);
  std::uniform_int_distribution<int> bits(1, 16);
  for (int i = 0; i < 10000; ++i) {
    const double m = lo(rng);
    const auto q = UniformQuantParams<double>::make(m, m + width(rng), bits(rng), m);
    const double v = x(rng);
    const double back = dequantize_uniform(quantize_uniform(v, q), q);
    REQUIRE(std::abs(back - mpq::clamp(v, q.min, q.max)) <= q.scale() / 2 * (1 + 1e-12));
  }
}

TEST_CASE("fake_quantize_uniform matches the scalar path") {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> g(0, 1);
  Eigen::ArrayXf a(1000);
  for (auto& v : a) v = g(rng);
  const auto q = UniformQuantParams<float>::make(-2, 2, 4, -2);
  const Eigen::ArrayXf f = fake_quantize_uniform(a, q);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    CHECK(f[i] == doctest::Approx(dequantize_uniform(quantize_uniform(a[i], q), q)).epsilon(1e-6));
  }
}

TEST_CASE("C(b) values") {
  CHECK(c_of_b(1) == doctest::Approx(1.0 / 12).epsilon(1e-15));
  CHECK(c_of_b(2) == doctest::Approx(1.0 / 108).epsilon(1e-15));
  CHECK(c_of_b(2) == doctest::Approx(0.0092593).epsilon(1e-5));
  CHECK_THROWS_AS(c_of_b(0), Error);
}

TEST_CASE("C(b+1) / C(b) < 1/4 for every b") {
  for (int b = 1; b < 32; ++b) {
    const double ratio_oracle = std::pow((std::pow(2.0, b) - 1) / (std::pow(2.0, b + 1) - 1), 2);
    CHECK(c_of_b(b + 1) / c_of_b(b) == doctest::Approx(ratio_oracle).epsilon(1e-12));
    CHECK(c_of_b(b + 1) / c_of_b(b) < 0.25);
  }
}

TEST_CASE("expected uniform error") {
  CHECK(expected_error_uniform(8, -1, 1) == doctest::Approx(4.0 / (12.0 * 255 * 255)).epsilon(1e-14));
  CHECK(expected_error_uniform(8, -1, 1) == doctest::Approx(5.1262e-6).epsilon(1e-4));
  CHECK(expected_error_uniform(4, 0.3, 0.3) == 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0, 10);
  for (int i = 0; i < 100; ++i) {
    const int b = 1 + static_cast<int>(rng() % 20);
    const double delta = d(rng);
    CHECK(expected_error_uniform(b, 1.0, 1.0 + delta) ==
          doctest::Approx(c_of_b(b) * delta * delta).epsilon(1e-12));
  }
}

TEST_CASE("measured MSE on uniform data matches s^2/12 within 10% at b = 8") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto q = UniformQuantParams<double>::make(-1, 1, 8, -1);
  double sum = 0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    const double e = dequantize_uniform(quantize_uniform(x, q), q) - x;
    sum += e * e;
  }
  const double predicted = expected_error_uniform(8, -1, 1);
  CHECK(std::abs(sum / n - predicted) / predicted < 0.10);
}
