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

#include <cstddef>
#include <vector>

#include "mpq/config.hpp"
#include "mpq/model_store.hpp"

namespace mpq {

/// Outcome of layer/channel selection. Index vectors are sorted ascending.
struct ImportancePartition {
  std::vector<double> layer_scores;
  std::vector<Eigen::VectorXd> channel_scores;
  std::vector<std::size_t> important_layers;
  std::vector<std::vector<std::size_t>> important_channels;
  std::vector<std::vector<int>> channel_bits;
  ImportanceConfig config;

  bool is_important_layer(std::size_t layer) const;
};

/// Sum of |w| over the layer, divided by the weight count when `normalize`.
double layer_score(const TensorRecord& tensor, bool normalize = false);

/// Euclidean norm of each output channel's weights.
Eigen::VectorXd channel_scores(const TensorRecord& tensor, const LayerDescriptor& layer);

/// round-half-away-from-zero(fraction * n) clamped to [0, n].
std::size_t selection_count(double fraction, std::size_t n);

/// Indices of the `count` largest scores; ties prefer the lower index. The
/// result is returned in ascending index order.
std::vector<std::size_t> top_indices(const Eigen::Ref<const Eigen::VectorXd>& scores, std::size_t count);

ImportancePartition partition(const ModelBundle& bundle, const ImportanceConfig& cfg);

/// Same selection from precomputed scores; lets sweeps over alpha/beta
/// reuse one scoring pass.
ImportancePartition partition(std::vector<double> layer_scores,
                              std::vector<Eigen::VectorXd> channel_scores,
                              const ImportanceConfig& cfg);

}  // namespace mpq
