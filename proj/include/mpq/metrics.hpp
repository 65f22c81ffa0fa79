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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mpq/config.hpp"
#include "mpq/model_store.hpp"

namespace mpq {

inline constexpr double kBitsPerMbit = 1e6;

inline double to_mbit(std::uint64_t bits) { return static_cast<double>(bits) / kBitsPerMbit; }

/// Sum over channels of (weights per channel x channel bit-width).
std::uint64_t model_size_bits(std::span<const LayerShape> layers,
                              const std::vector<std::vector<int>>& channel_bits);
std::uint64_t model_size_bits(const ModelBundle& bundle,
                              const std::vector<std::vector<int>>& channel_bits);
std::uint64_t model_size_bits(const QuantizedModel& model);

/// Every weight at the same width (32 gives the float baseline).
std::uint64_t uniform_size_bits(std::span<const LayerShape> layers, int bits);
std::uint64_t uniform_size_bits(const ModelBundle& bundle, int bits);

/// 100 (1 - quantized / baseline).
double size_reduction_pct(std::uint64_t quantized_bits, std::uint64_t baseline_bits);

/// Region mask plus per-layer and per-channel metadata stored beside the codes.
std::uint64_t overhead_bits(const QuantizedModel& model);

/// Bit operations of one layer: m n k^2 (b_a b_w + b_a + b_w log2(n k^2)).
double bops_layer(double m, double n, double k, double act_bits, double weight_bits);

/// Output channels grouped by bit-width, one bops_layer term per group.
double bops_layer_mixed(const LayerShape& shape, std::span<const int> channel_bits, int act_bits);

double bops_model(std::span<const LayerShape> layers, const std::vector<std::vector<int>>& channel_bits,
                  int act_bits);
double bops_model(const ModelBundle& bundle, const std::vector<std::vector<int>>& channel_bits,
                  int act_bits);

struct LayerError {
  double sum_squared = 0.0;
  std::uint64_t count = 0;
  double mse() const noexcept { return count == 0 ? 0.0 : sum_squared / static_cast<double>(count); }
};

struct MseReport {
  std::vector<LayerError> layers;
  LayerError total;
};

/// Mean of (decoded - original)^2 per layer and over all weights.
MseReport mse_report(const ModelBundle& original, const QuantizedModel& quantized,
                     unsigned threads = 0);

struct LayerReport {
  std::size_t layer_index = 0;
  std::uint64_t params = 0;
  std::map<int, std::uint64_t> bits_histogram;  // bit-width -> channel count
  double breakpoint = 0.0;
  double bound = 0.0;
  double mse = 0.0;
  double bops = 0.0;
};

struct QuantReport {
  std::string model_name;
  std::uint64_t baseline_bits = 0;
  std::uint64_t quantized_bits = 0;
  std::uint64_t overhead_bits = 0;
  double size_reduction_pct = 0.0;
  double total_mse = 0.0;
  double total_bops = 0.0;
  std::vector<LayerReport> layers;
  std::optional<QuantConfig> config;
};

/// `act_bits` is used for BOPs when the quantized model carries no config.
QuantReport make_report(const ModelBundle& original, const QuantizedModel& quantized,
                        int act_bits = 8, unsigned threads = 0);

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(std::string_view text);
void emit_report(const QuantReport& report, std::ostream& out, ReportFormat format);
void emit_report(const QuantReport& report, const std::filesystem::path& path, ReportFormat format);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace mpq
