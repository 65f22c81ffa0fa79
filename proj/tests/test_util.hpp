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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mpq/model_store.hpp"

namespace mpq::testing {

inline std::filesystem::path temp_dir() {
  const char* env = std::getenv("MPQ_TEST_TMP");
  auto dir = std::filesystem::path(env ? env : std::filesystem::temp_directory_path().string()) /
             "mpq_tmp";
  std::filesystem::create_directories(dir);
  return dir;
}

inline TensorRecord make_tensor(std::string name, std::vector<std::int64_t> shape,
                                const std::vector<float>& values) {
  TensorRecord t;
  t.name = std::move(name);
  t.shape = std::move(shape);
  t.data = Eigen::Map<const Eigen::VectorXf>(values.data(), static_cast<Eigen::Index>(values.size()));
  return t;
}

/// Fully-connected layers with the given output-channel counts, filled by fill(layer, i).
template <typename Fill>
ModelBundle make_bundle(const std::vector<std::int64_t>& out_channels, std::int64_t channel_size,
                        Fill&& fill, std::string model_name = "test") {
  ModelBundle b;
  b.model_name = std::move(model_name);
  for (std::size_t i = 0; i < out_channels.size(); ++i) {
    LayerDescriptor d;
    d.index = i;
    d.shape = {LayerKind::fc, out_channels[i], channel_size, 1};
    d.tensor_name = "t" + std::to_string(1000 + i);
    TensorRecord t;
    t.name = d.tensor_name;
    t.shape = d.shape.tensor_shape();
    t.data.resize(d.shape.weight_count());
    for (Eigen::Index j = 0; j < t.data.size(); ++j) t.data[j] = fill(i, j);
    b.tensors.emplace(t.name, std::move(t));
    b.layers.push_back(std::move(d));
  }
  return b;
}

inline ModelBundle random_bundle(std::mt19937_64& rng, std::size_t max_layers, std::int64_t max_channels,
                                 std::int64_t channel_size) {
  std::uniform_int_distribution<std::size_t> nl(1, max_layers);
  std::uniform_int_distribution<std::int64_t> nc(1, max_channels);
  std::vector<std::int64_t> channels(nl(rng));
  for (auto& c : channels) c = nc(rng);
  std::vector<double> spread(channels.size());
  std::uniform_real_distribution<double> sd(0.01, 0.2);
  for (auto& s : spread) s = sd(rng);
  std::normal_distribution<double> g(0.0, 1.0);
  return make_bundle(channels, channel_size,
                     [&](std::size_t i, Eigen::Index) { return static_cast<float>(spread[i] * g(rng)); });
}

inline double float_ulp(double magnitude) {
  const auto f = static_cast<float>(std::abs(magnitude));
  return static_cast<double>(std::nextafter(f, std::numeric_limits<float>::infinity()) - f);
}

}  // namespace mpq::testing
