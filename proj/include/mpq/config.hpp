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

namespace mpq {

/// Layer/channel selection knobs. `alpha` is the percentage of layers treated
/// as important; `beta` the fraction of channels marked important inside an
/// important layer (a non-important layer keeps 1 - beta of its channels).
struct ImportanceConfig {
  double alpha = 0.0;
  double beta = 0.5;
  int high_bits = 8;
  int low_bits = 2;
  bool normalize_layer_score = false;

  /// Throws Errc::invalid_argument unless 0 <= alpha <= 100, 0 <= beta <= 1
  /// and 32 >= high_bits >= low_bits >= 2.
  void validate() const;

  bool operator==(const ImportanceConfig&) const = default;
};

/// Everything needed to reproduce a quantization run.
struct QuantConfig {
  ImportanceConfig importance;
  int act_bits = 8;
  int grid_size = 200;

  void validate() const;

  bool operator==(const QuantConfig&) const = default;
};

}  // namespace mpq
