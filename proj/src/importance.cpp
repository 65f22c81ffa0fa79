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

#include "mpq/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mpq/error.hpp"

namespace mpq {

void ImportanceConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 100.0)) {
    throw Error(Errc::invalid_argument, "alpha must lie in [0, 100]");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(Errc::invalid_argument, "beta must lie in [0, 1]");
  if (low_bits < 2 || high_bits < low_bits || high_bits > 32) {
    throw Error(Errc::invalid_argument, "bit-widths need 32 >= important >= other >= 2, got (" +
                                            std::to_string(high_bits) + ", " +
                                            std::to_string(low_bits) + ")");
  }
}

void QuantConfig::validate() const {
  importance.validate();
  if (act_bits < 1 || act_bits > 32) throw Error(Errc::invalid_argument, "act-bits out of range");
  if (grid_size < 2) throw Error(Errc::invalid_argument, "grid needs at least 2 points");
}

bool ImportancePartition::is_important_layer(std::size_t layer) const {
  return std::binary_search(important_layers.begin(), important_layers.end(), layer);
}

double layer_score(const TensorRecord& tensor, bool normalize) {
  if (tensor.data.size() == 0) return 0.0;
  const double sum = tensor.data.cast<double>().cwiseAbs().sum();
  return normalize ? sum / static_cast<double>(tensor.data.size()) : sum;
}

Eigen::VectorXd channel_scores(const TensorRecord& tensor, const LayerDescriptor& layer) {
  return tensor.channels(layer.shape.out_channels).cast<double>().rowwise().norm();
}

std::size_t selection_count(double fraction, std::size_t n) {
  const double k = std::round(fraction * static_cast<double>(n));
  if (!(k > 0)) return 0;
  return std::min(n, static_cast<std::size_t>(k));
}

std::vector<std::size_t> top_indices(const Eigen::Ref<const Eigen::VectorXd>& scores, std::size_t count) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto sa = scores[static_cast<Eigen::Index>(a)];
                      const auto sb = scores[static_cast<Eigen::Index>(b)];
                      return sa > sb || (sa == sb && a < b);
                    });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

ImportancePartition partition(std::vector<double> layer_scores,
                              std::vector<Eigen::VectorXd> channel_scores,
                              const ImportanceConfig& cfg) {
  cfg.validate();
  if (layer_scores.empty()) throw Error(Errc::empty_bundle, "cannot partition a model with no layers");
  if (channel_scores.size() != layer_scores.size()) {
    throw Error(Errc::invalid_argument, "one channel-score vector per layer required");
  }
  ImportancePartition out;
  out.config = cfg;
  const std::size_t num_layers = layer_scores.size();
  const Eigen::Map<const Eigen::VectorXd> layer_view(layer_scores.data(),
                                                     static_cast<Eigen::Index>(num_layers));
  out.important_layers = top_indices(layer_view, selection_count(cfg.alpha / 100.0, num_layers));

  out.important_channels.resize(num_layers);
  out.channel_bits.resize(num_layers);
  for (std::size_t i = 0; i < num_layers; ++i) {
    const auto& scores = channel_scores[i];
    const auto channels = static_cast<std::size_t>(scores.size());
    const double keep = out.is_important_layer(i) ? cfg.beta : 1.0 - cfg.beta;
    out.important_channels[i] = top_indices(scores, selection_count(keep, channels));
    out.channel_bits[i].assign(channels, cfg.low_bits);
    for (std::size_t c : out.important_channels[i]) out.channel_bits[i][c] = cfg.high_bits;
  }
  out.layer_scores = std::move(layer_scores);
  out.channel_scores = std::move(channel_scores);
  return out;
}

ImportancePartition partition(const ModelBundle& bundle, const ImportanceConfig& cfg) {
  if (bundle.layers.empty()) throw Error(Errc::empty_bundle, "cannot partition a model with no layers");
  std::vector<double> layer_scores;
  std::vector<Eigen::VectorXd> per_channel;
  for (const auto& layer : bundle.layers) {
    const TensorRecord& t = bundle.tensor_for(layer);
    layer_scores.push_back(layer_score(t, cfg.normalize_layer_score));
    per_channel.push_back(channel_scores(t, layer));
  }
  return partition(std::move(layer_scores), std::move(per_channel), cfg);
}

}  // namespace mpq
