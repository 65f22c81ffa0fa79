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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mpq/uniform.hpp"

namespace mpq {

enum class Region : std::uint8_t { dense = 0, sparse = 1 };

/// Two non-overlapping grids on |x|: the dense region [0, p] and the sparse
/// region (p, l], each with 2^(b-1) - 1 steps; the remaining bit holds the
/// sign. A layer whose weights are all zero carries p = l = 0.
template <typename Scalar>
struct PiecewiseParams {
  Scalar bound = 0;       // l
  Scalar breakpoint = 0;  // p
  int bits = 8;

  static PiecewiseParams make(Scalar bound, Scalar breakpoint, int bits) {
    if (bits < 2 || bits > 32) {
      throw Error(Errc::invalid_argument, "piecewise bit-width " + std::to_string(bits));
    }
    const bool degenerate = bound == 0 && breakpoint == 0;
    if (!degenerate && !(bound > 0 && breakpoint > 0 && breakpoint <= bound / 2)) {
      throw Error(Errc::invalid_argument, "piecewise params need 0 < p <= l/2");
    }
    return {bound, breakpoint, bits};
  }

  bool degenerate() const noexcept { return bound == 0; }
  std::uint32_t max_code() const noexcept {
    return static_cast<std::uint32_t>(level_count(bits - 1));
  }
  Scalar dense_scale() const noexcept {
    return breakpoint / static_cast<Scalar>(level_count(bits - 1));
  }
  Scalar sparse_scale() const noexcept {
    return (bound - breakpoint) / static_cast<Scalar>(level_count(bits - 1));
  }
};

struct PiecewiseCode {
  bool negative = false;
  std::uint32_t magnitude = 0;
  Region region = Region::dense;

  bool operator==(const PiecewiseCode&) const = default;
};

/// The dense region is closed: |x| == p encodes as dense.
template <typename Scalar>
PiecewiseCode quantize_piecewise(Scalar x, const PiecewiseParams<Scalar>& q) {
  if (q.degenerate()) return {};
  const Scalar a = std::abs(x);
  PiecewiseCode code;
  code.negative = std::signbit(x) && a != 0;
  const Scalar zero = 0;
  if (a <= q.breakpoint) {
    code.region = Region::dense;
    const auto grid = UniformQuantParams<Scalar>{zero, q.breakpoint, q.bits - 1, zero};
    code.magnitude = static_cast<std::uint32_t>(quantize_uniform(a, grid));
  } else {
    code.region = Region::sparse;
    const auto grid = UniformQuantParams<Scalar>{q.breakpoint, q.bound, q.bits - 1, q.breakpoint};
    code.magnitude = grid.scale() > 0 ? static_cast<std::uint32_t>(quantize_uniform(a, grid)) : 0;
  }
  return code;
}

/// Decodes with explicit per-region scales, the form stored in .ptqq files.
template <typename Scalar>
Scalar dequantize_piecewise(const PiecewiseCode& code, Scalar breakpoint, Scalar dense_scale,
                            Scalar sparse_scale) noexcept {
  const Scalar mag = code.region == Region::dense
                         ? dense_scale * static_cast<Scalar>(code.magnitude)
                         : breakpoint + sparse_scale * static_cast<Scalar>(code.magnitude);
  return code.negative ? -mag : mag;
}

template <typename Scalar>
Scalar dequantize_piecewise(const PiecewiseCode& code, const PiecewiseParams<Scalar>& q) noexcept {
  return dequantize_piecewise(code, q.breakpoint, q.dense_scale(), q.sparse_scale());
}

/// Sorted |w| of one layer; answers "what fraction of weights lie in [-p, p]",
/// which for a distribution symmetric about zero equals 2F(p) - 1.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::span<const float> weights);
  explicit EmpiricalCdf(const Eigen::Ref<const Eigen::VectorXf>& weights)
      : EmpiricalCdf(std::span<const float>(weights.data(), static_cast<std::size_t>(weights.size()))) {}

  std::size_t size() const noexcept { return sorted_abs_.size(); }
  double max_abs() const noexcept { return sorted_abs_.empty() ? 0.0 : sorted_abs_.back(); }
  double fraction_within(double p) const;
  const std::vector<double>& sorted_abs() const noexcept { return sorted_abs_; }

 private:
  std::vector<double> sorted_abs_;
};

/// Expected squared error of two-region quantization at breakpoint p,
/// C(b-1) [(l-p)^2 + l(2p-l)(2F(p)-1)].
double expected_error_piecewise(int bits, double bound, double breakpoint, const EmpiricalCdf& cdf);

struct Breakpoint {
  double p = 0.0;
  double error = 0.0;
};

/// Grid points p_i = l * i / grid_size for i = 1 .. grid_size / 2.
std::vector<double> breakpoint_grid(double bound, int grid_size);

/// Arg-min of expected_error_piecewise over breakpoint_grid with l = max|w|;
/// ties go to the smaller p. Returns nullopt when every weight is zero.
std::optional<Breakpoint> find_breakpoint(const EmpiricalCdf& cdf, int bits, int grid_size = 200);

}  // namespace mpq
