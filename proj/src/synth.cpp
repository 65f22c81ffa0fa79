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

#include "mpq/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "mpq/error.hpp"
#include "mpq/parallel.hpp"

#ifndef MPQ_ARCH_DIR
#define MPQ_ARCH_DIR "data/arch"
#endif

namespace mpq {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream reserved for per-layer constants, outside any weight index range.
constexpr std::uint64_t kLayerConstantIndex = ~std::uint64_t{0};

}  // namespace

std::uint64_t ArchDescriptor::total_params() const noexcept {
  std::uint64_t total = 0;
  for (const auto& s : layers) total += static_cast<std::uint64_t>(s.weight_count());
  return total;
}

ArchDescriptor parse_arch(std::string_view json_text) {
  using nlohmann::json;
  ArchDescriptor arch;
  try {
    const json j = json::parse(json_text);
    arch.name = j.at("name").get<std::string>();
    for (const auto& entry : j.at("layers")) {
      if (!entry.is_array() || entry.size() != 4) {
        throw Error(Errc::invalid_header, "descriptor layer must be [kind, m, n, k]");
      }
      LayerShape s;
      s.kind = parse_layer_kind(entry[0].get<std::string>());
      s.out_channels = entry[1].get<std::int64_t>();
      s.in_channels = entry[2].get<std::int64_t>();
      s.kernel_size = entry[3].get<std::int64_t>();
      if (s.out_channels <= 0 || s.in_channels <= 0 || s.kernel_size <= 0 ||
          (s.kind == LayerKind::fc && s.kernel_size != 1)) {
        throw Error(Errc::shape_mismatch, "descriptor layer " + std::to_string(arch.layers.size()) +
                                              " has invalid geometry");
      }
      arch.layers.push_back(s);
    }
    if (j.contains("total_params") && j.at("total_params").get<std::uint64_t>() != arch.total_params()) {
      throw Error(Errc::invalid_header, "descriptor total_params disagrees with its layers");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_header, std::string("architecture descriptor: ") + e.what());
  }
  return arch;
}

ArchDescriptor load_arch(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_arch(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::filesystem::path builtin_arch_dir() { return MPQ_ARCH_DIR; }

ArchDescriptor resolve_arch(std::string_view name_or_path) {
  if (name_or_path == "resnet50-like") return load_arch(builtin_arch_dir() / "resnet50_like.json");
  if (name_or_path == "mobilenetv2-like") return load_arch(builtin_arch_dir() / "mobilenetv2_like.json");
  return load_arch(std::filesystem::path(name_or_path));
}

DistKind parse_dist_kind(std::string_view text) {
  if (text == "gaussian") return DistKind::gaussian;
  if (text == "laplace") return DistKind::laplace;
  if (text == "uniform") return DistKind::uniform;
  throw Error(Errc::invalid_argument, "unknown distribution '" + std::string(text) + "'");
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(stream ^ splitmix64(index)));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double sample(const Distribution& dist, std::uint64_t seed, std::uint64_t layer,
              std::uint64_t index) noexcept {
  const double u = counter_uniform(seed, layer, 2 * index);
  switch (dist.kind) {
    case DistKind::gaussian: {
      // Box-Muller, cosine branch; the partner uniform lives at 2 * index + 1.
      const double v = counter_uniform(seed, layer, 2 * index + 1);
      return dist.param * std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }
    case DistKind::laplace: {
      const double t = u - 0.5;
      return -dist.param * std::copysign(1.0, t) * std::log1p(-2.0 * std::abs(t));
    }
    case DistKind::uniform:
      return dist.param * (2.0 * u - 1.0);
  }
  return 0.0;
}

double layer_spread(std::uint64_t seed, std::uint64_t layer) noexcept {
  return 0.5 + counter_uniform(seed, layer, kLayerConstantIndex);
}

std::string synthetic_tensor_name(std::size_t layer) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "layer.%04zu.weight", layer);
  return buf;
}

ModelBundle gen_model(const ArchDescriptor& arch, const Distribution& dist, std::uint64_t seed,
                      bool layer_scaling, unsigned threads) {
  if (!(dist.param > 0) || !std::isfinite(dist.param)) {
    throw Error(Errc::invalid_argument, "distribution parameter must be positive");
  }
  ModelBundle bundle;
  bundle.model_name = arch.name;
  std::vector<TensorRecord> tensors(arch.layers.size());
  parallel_for(arch.layers.size(), threads, [&](std::size_t i) {
    const LayerShape& s = arch.layers[i];
    Distribution layer_dist = dist;
    if (layer_scaling) layer_dist.param *= layer_spread(seed, i);
    TensorRecord& t = tensors[i];
    t.name = synthetic_tensor_name(i);
    t.shape = s.tensor_shape();
    t.data.resize(s.weight_count());
    for (Eigen::Index j = 0; j < t.data.size(); ++j) {
      t.data[j] = static_cast<float>(sample(layer_dist, seed, i, static_cast<std::uint64_t>(j)));
    }
  });
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    bundle.layers.push_back(LayerDescriptor{i, arch.layers[i], tensors[i].name});
    bundle.tensors.emplace(tensors[i].name, std::move(tensors[i]));
  }
  bundle.validate();
  return bundle;
}

}  // namespace mpq
