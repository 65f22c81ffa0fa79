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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mpq/model_store.hpp"

namespace mpq {

/// Layer geometry of a network without weights. Descriptor files are JSON:
///   {"name": "...", "total_params": N, "layers": [["conv", m, n, k], ["fc", m, n, 1], ...]}
/// `total_params` is optional and checked against the layer list when present.
struct ArchDescriptor {
  std::string name;
  std::vector<LayerShape> layers;

  std::uint64_t total_params() const noexcept;
};

ArchDescriptor parse_arch(std::string_view json_text);
ArchDescriptor load_arch(const std::filesystem::path& path);

/// Directory holding the shipped descriptors (resnet50_like.json, ...).
std::filesystem::path builtin_arch_dir();

/// Resolves "resnet50-like" / "mobilenetv2-like" to the shipped files, and
/// anything else as a path.
ArchDescriptor resolve_arch(std::string_view name_or_path);

enum class DistKind { gaussian, laplace, uniform };

DistKind parse_dist_kind(std::string_view text);

/// `param` is sigma for gaussian, the scale b for laplace and the half-width
/// l for uniform.
struct Distribution {
  DistKind kind = DistKind::gaussian;
  double param = 0.05;
};

/// Deterministic hash-to-(0,1) keyed by (seed, stream, index).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

/// One draw at position `index` of layer `layer`'s stream.
double sample(const Distribution& dist, std::uint64_t seed, std::uint64_t layer,
              std::uint64_t index) noexcept;

/// Per-layer spread multiplier in [0.5, 1.5) that gives layers distinct scores.
double layer_spread(std::uint64_t seed, std::uint64_t layer) noexcept;

/// Tensor name used for layer i ("layer.0007.weight").
std::string synthetic_tensor_name(std::size_t layer);

/// I.i.d. weights per layer; depends only on (arch, dist, seed) and never on
/// the thread count. With `layer_scaling` each layer's spread is multiplied
/// by layer_spread(seed, i).
ModelBundle gen_model(const ArchDescriptor& arch, const Distribution& dist, std::uint64_t seed,
                      bool layer_scaling = true, unsigned threads = 0);

}  // namespace mpq
