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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpq/config.hpp"

namespace mpq {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::string_view kBundleMagic = "PTQB";
inline constexpr std::string_view kQuantizedMagic = "PTQQ";

enum class LayerKind { conv, fc };

std::string_view to_string(LayerKind kind) noexcept;
LayerKind parse_layer_kind(std::string_view text);

/// Geometry of a conv (m x n x k x k) or fully-connected (m x n) weight.
/// Fully-connected layers behave as 1x1 convolutions everywhere.
struct LayerShape {
  LayerKind kind = LayerKind::conv;
  std::int64_t out_channels = 1;
  std::int64_t in_channels = 1;
  std::int64_t kernel_size = 1;

  std::int64_t channel_size() const noexcept { return in_channels * kernel_size * kernel_size; }
  std::int64_t weight_count() const noexcept { return out_channels * channel_size(); }
  std::vector<std::int64_t> tensor_shape() const;

  bool operator==(const LayerShape&) const = default;
};

struct LayerDescriptor {
  std::size_t index = 0;
  LayerShape shape;
  std::string tensor_name;

  bool operator==(const LayerDescriptor&) const = default;
};

using RowMajorMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TensorRecord {
  std::string name;
  std::vector<std::int64_t> shape;
  Eigen::VectorXf data;

  std::int64_t element_count() const noexcept;

  /// Row c holds the weights of output channel c.
  Eigen::Map<const RowMajorMatrixXf> channels(std::int64_t out_channels) const;

  /// Bit-exact comparison of name, shape and payload.
  bool operator==(const TensorRecord& other) const;
};

struct ModelBundle {
  std::string model_name;
  std::vector<LayerDescriptor> layers;
  std::map<std::string, TensorRecord> tensors;

  const TensorRecord& tensor_for(const LayerDescriptor& layer) const;
  std::int64_t weight_count() const noexcept;

  /// Checks every structural and numeric invariant; throws mpq::Error with
  /// the family and the offending layer or tensor.
  void validate() const;

  bool operator==(const ModelBundle&) const = default;
};

struct QuantizedLayer {
  LayerDescriptor layer;
  double breakpoint = 0.0;  // p
  double bound = 0.0;       // l
  std::vector<int> channel_bits;
  std::vector<double> dense_scales;
  std::vector<double> sparse_scales;
  std::vector<std::uint8_t> codes;
  std::uint64_t codes_nbits = 0;
  std::vector<std::uint8_t> region_mask;
  std::uint64_t mask_nbits = 0;

  std::uint64_t weight_count() const noexcept { return mask_nbits; }
  std::uint64_t expected_code_bits() const;

  void validate() const;

  bool operator==(const QuantizedLayer&) const = default;
};

struct QuantizedModel {
  std::string source_model_name;
  std::vector<QuantizedLayer> layers;
  std::optional<QuantConfig> config;

  void validate() const;

  bool operator==(const QuantizedModel&) const = default;
};

ModelBundle load_bundle(const std::filesystem::path& path);
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle parse_bundle(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_bundle(const ModelBundle& bundle);

QuantizedModel load_quantized(const std::filesystem::path& path);
void save_quantized(const QuantizedModel& model, const std::filesystem::path& path);
QuantizedModel parse_quantized(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_quantized(const QuantizedModel& model);

/// Reads the four magic bytes of a container without parsing the rest.
std::string peek_magic(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mpq
