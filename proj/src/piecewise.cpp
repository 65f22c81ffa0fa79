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

#include "mpq/piecewise.hpp"

#include <algorithm>

namespace mpq {

EmpiricalCdf::EmpiricalCdf(std::span<const float> weights) {
  sorted_abs_.reserve(weights.size());
  for (float w : weights) sorted_abs_.push_back(std::abs(static_cast<double>(w)));
  std::sort(sorted_abs_.begin(), sorted_abs_.end());
}

double EmpiricalCdf::fraction_within(double p) const {
  if (sorted_abs_.empty()) throw Error(Errc::invalid_argument, "empty CDF");
  const auto within = std::upper_bound(sorted_abs_.begin(), sorted_abs_.end(), p) - sorted_abs_.begin();
  return static_cast<double>(within) / static_cast<double>(sorted_abs_.size());
}

double expected_error_piecewise(int bits, double bound, double breakpoint, const EmpiricalCdf& cdf) {
  if (bits < 2) throw Error(Errc::invalid_argument, "piecewise error needs b >= 2");
  if (cdf.size() == 0) throw Error(Errc::invalid_argument, "empty CDF");
  const double l = bound;
  const double p = breakpoint;
  return c_of_b(bits - 1) * ((l - p) * (l - p) + l * (2 * p - l) * cdf.fraction_within(p));
}

std::vector<double> breakpoint_grid(double bound, int grid_size) {
  if (grid_size < 2) throw Error(Errc::invalid_argument, "breakpoint grid needs >= 2 points");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(grid_size / 2));
  for (int i = 1; i <= grid_size / 2; ++i) grid.push_back(bound * (static_cast<double>(i) / grid_size));
  return grid;
}

std::optional<Breakpoint> find_breakpoint(const EmpiricalCdf& cdf, int bits, int grid_size) {
  if (cdf.size() == 0) throw Error(Errc::invalid_argument, "empty CDF");
  const double l = cdf.max_abs();
  if (!(l > 0)) return std::nullopt;
  std::optional<Breakpoint> best;
  for (double p : breakpoint_grid(l, grid_size)) {
    const double e = expected_error_piecewise(bits, l, p, cdf);
    if (!best || e < best->error) best = Breakpoint{p, e};
  }
  return best;
}

}  // namespace mpq
