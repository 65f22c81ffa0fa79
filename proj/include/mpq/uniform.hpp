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

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "mpq/error.hpp"

namespace mpq {

/// min(max(x, lo), hi). Unlike std::clamp this accepts lo == hi and never
/// asserts on ordering; callers guarantee hi >= lo.
template <typename Scalar>
constexpr Scalar clamp(Scalar x, Scalar lo, Scalar hi) noexcept {
  return std::min(std::max(x, lo), hi);
}

/// Number of non-zero levels of a b-bit unsigned grid, 2^b - 1.
inline double level_count(int bits) { return std::ldexp(1.0, bits) - 1.0; }

/// Affine b-bit grid over [min, max] shifted by `offset`.
/// Rounding is half-away-from-zero (std::round) everywhere in the library.
template <typename Scalar>
struct UniformQuantParams {
  Scalar min = 0;
  Scalar max = 0;
  int bits = 8;
  Scalar offset = 0;

  static UniformQuantParams make(Scalar min, Scalar max, int bits, Scalar offset = 0) {
    if (!(max >= min)) throw Error(Errc::invalid_argument, "uniform range has max < min");
    if (bits < 1 || bits > 32) {
      throw Error(Errc::invalid_argument, "uniform bit-width " + std::to_string(bits));
    }
    return {min, max, bits, offset};
  }

  Scalar range() const noexcept { return max - min; }
  Scalar scale() const noexcept { return range() / static_cast<Scalar>(level_count(bits)); }
};

template <typename Scalar>
std::int64_t quantize_uniform(Scalar x, const UniformQuantParams<Scalar>& q) {
  const Scalar s = q.scale();
  if (!(s > 0)) throw Error(Errc::zero_range, "uniform quantizer with zero range");
  return static_cast<std::int64_t>(std::round((clamp(x, q.min, q.max) - q.offset) / s));
}

template <typename Scalar>
Scalar dequantize_uniform(std::int64_t code, const UniformQuantParams<Scalar>& q) noexcept {
  return static_cast<Scalar>(code) * q.scale() + q.offset;
}

/// Quantize-then-dequantize a whole array on one grid. A zero-range grid
/// reproduces the clamped input.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> fake_quantize_uniform(
    const Eigen::ArrayBase<Derived>& x, const UniformQuantParams<typename Derived::Scalar>& q) {
  using Scalar = typename Derived::Scalar;
  const Scalar s = q.scale();
  if (!(s > 0)) return x.max(q.min).min(q.max);
  return (((x.max(q.min).min(q.max) - q.offset) / s).round() * s + q.offset).eval();
}

/// 1 / (12 (2^b - 1)^2): mean squared rounding error of a unit range on a
/// b-bit grid.
inline double c_of_b(int bits) {
  if (bits < 1) throw Error(Errc::invalid_argument, "C(b) needs b >= 1");
  const double levels = level_count(bits);
  return 1.0 / (12.0 * levels * levels);
}

/// s^2 / 12 for a b-bit grid over [min, max].
inline double expected_error_uniform(int bits, double min, double max) {
  const double range = max - min;
  return c_of_b(bits) * range * range;
}

}  // namespace mpq
