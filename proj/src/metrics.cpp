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

#include "mpq/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "mpq/error.hpp"
#include "mpq/parallel.hpp"
#include "mpq/quantize_model.hpp"

namespace mpq {

namespace {

std::vector<LayerShape> shapes_of(const ModelBundle& bundle) {
  std::vector<LayerShape> shapes;
  for (const auto& layer : bundle.layers) shapes.push_back(layer.shape);
  return shapes;
}

void check_bits_match(std::span<const LayerShape> layers, const std::vector<std::vector<int>>& bits) {
  if (bits.size() != layers.size()) {
    throw Error(Errc::invalid_argument, "channel bit-widths given for " + std::to_string(bits.size()) +
                                            " layers, model has " + std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (bits[i].size() != static_cast<std::size_t>(layers[i].out_channels)) {
      throw Error(Errc::shape_mismatch, "layer " + std::to_string(i) + " bit-width count");
    }
  }
}

std::map<int, std::uint64_t> histogram(std::span<const int> bits) {
  std::map<int, std::uint64_t> h;
  for (int b : bits) ++h[b];
  return h;
}

}  // namespace

std::uint64_t model_size_bits(std::span<const LayerShape> layers,
                              const std::vector<std::vector<int>>& channel_bits) {
  check_bits_match(layers, channel_bits);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto per_channel = static_cast<std::uint64_t>(layers[i].channel_size());
    for (int b : channel_bits[i]) total += per_channel * static_cast<std::uint64_t>(b);
  }
  return total;
}

std::uint64_t model_size_bits(const ModelBundle& bundle,
                              const std::vector<std::vector<int>>& channel_bits) {
  return model_size_bits(shapes_of(bundle), channel_bits);
}

std::uint64_t model_size_bits(const QuantizedModel& model) {
  std::uint64_t total = 0;
  for (const auto& q : model.layers) total += q.expected_code_bits();
  return total;
}

std::uint64_t uniform_size_bits(std::span<const LayerShape> layers, int bits) {
  std::uint64_t total = 0;
  for (const auto& s : layers) total += static_cast<std::uint64_t>(s.weight_count());
  return total * static_cast<std::uint64_t>(bits);
}

std::uint64_t uniform_size_bits(const ModelBundle& bundle, int bits) {
  return uniform_size_bits(shapes_of(bundle), bits);
}

double size_reduction_pct(std::uint64_t quantized_bits, std::uint64_t baseline_bits) {
  if (baseline_bits == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(quantized_bits) / static_cast<double>(baseline_bits));
}

std::uint64_t overhead_bits(const QuantizedModel& model) {
  std::uint64_t total = 0;
  for (const auto& q : model.layers) {
    const auto channels = static_cast<std::uint64_t>(q.channel_bits.size());
    total += q.mask_nbits + 2 * 32 + channels * (2 * 32 + 8);
  }
  return total;
}

double bops_layer(double m, double n, double k, double act_bits, double weight_bits) {
  const double macs = m * n * k * k;
  return macs * (act_bits * weight_bits + act_bits + weight_bits * std::log2(n * k * k));
}

double bops_layer_mixed(const LayerShape& shape, std::span<const int> channel_bits, int act_bits) {
  double total = 0.0;
  for (const auto& [bits, count] : histogram(channel_bits)) {
    total += bops_layer(static_cast<double>(count), static_cast<double>(shape.in_channels),
                        static_cast<double>(shape.kernel_size), act_bits, bits);
  }
  return total;
}

double bops_model(std::span<const LayerShape> layers, const std::vector<std::vector<int>>& channel_bits,
                  int act_bits) {
  check_bits_match(layers, channel_bits);
  double total = 0.0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    total += bops_layer_mixed(layers[i], channel_bits[i], act_bits);
  }
  return total;
}

double bops_model(const ModelBundle& bundle, const std::vector<std::vector<int>>& channel_bits,
                  int act_bits) {
  return bops_model(shapes_of(bundle), channel_bits, act_bits);
}

MseReport mse_report(const ModelBundle& original, const QuantizedModel& quantized, unsigned threads) {
  if (original.layers.size() != quantized.layers.size()) {
    throw Error(Errc::shape_mismatch, "quantized model has " +
                                          std::to_string(quantized.layers.size()) +
                                          " layers, original has " +
                                          std::to_string(original.layers.size()));
  }
  MseReport report;
  report.layers.resize(original.layers.size());
  parallel_for(original.layers.size(), threads, [&](std::size_t i) {
    const TensorRecord& t = original.tensor_for(original.layers[i]);
    const Eigen::VectorXf decoded = decode_layer(quantized.layers[i]);
    if (decoded.size() != t.data.size()) {
      throw Error(Errc::shape_mismatch, "layer " + std::to_string(i) + " weight count differs");
    }
    const Eigen::ArrayXd diff = decoded.cast<double>().array() - t.data.cast<double>().array();
    report.layers[i] = {diff.square().sum(), static_cast<std::uint64_t>(diff.size())};
  });
  for (const auto& e : report.layers) {
    report.total.sum_squared += e.sum_squared;
    report.total.count += e.count;
  }
  return report;
}

QuantReport make_report(const ModelBundle& original, const QuantizedModel& quantized, int act_bits,
                        unsigned threads) {
  QuantReport r;
  r.model_name = original.model_name;
  r.config = quantized.config;
  if (quantized.config) act_bits = quantized.config->act_bits;

  const MseReport mse = mse_report(original, quantized, threads);
  r.baseline_bits = uniform_size_bits(original, 32);
  r.quantized_bits = model_size_bits(quantized);
  r.overhead_bits = overhead_bits(quantized);
  r.size_reduction_pct = size_reduction_pct(r.quantized_bits, r.baseline_bits);
  r.total_mse = mse.total.mse();
  for (std::size_t i = 0; i < quantized.layers.size(); ++i) {
    const auto& q = quantized.layers[i];
    LayerReport l;
    l.layer_index = q.layer.index;
    l.params = static_cast<std::uint64_t>(q.layer.shape.weight_count());
    l.bits_histogram = histogram(q.channel_bits);
    l.breakpoint = q.breakpoint;
    l.bound = q.bound;
    l.mse = mse.layers[i].mse();
    l.bops = bops_layer_mixed(q.layer.shape, q.channel_bits, act_bits);
    r.total_bops += l.bops;
    r.layers.push_back(std::move(l));
  }
  return r;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  throw Error(Errc::invalid_argument, "unknown report format '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void emit_report(const QuantReport& r, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::csv) {
    out << "layer_index,params,bits_histogram,p,l,mse,bops\n";
    for (const auto& l : r.layers) {
      std::string hist;
      for (const auto& [bits, count] : l.bits_histogram) {
        if (!hist.empty()) hist += ';';
        hist += std::to_string(bits) + ':' + std::to_string(count);
      }
      out << l.layer_index << ',' << l.params << ',' << hist << ',' << format_double(l.breakpoint)
          << ',' << format_double(l.bound) << ',' << format_double(l.mse) << ','
          << format_double(l.bops) << '\n';
    }
    return;
  }

  using nlohmann::ordered_json;
  ordered_json j;
  j["model_name"] = r.model_name;
  j["baseline_bits"] = r.baseline_bits;
  j["quantized_bits_paper"] = r.quantized_bits;
  j["overhead_bits"] = r.overhead_bits;
  j["baseline_mbit"] = to_mbit(r.baseline_bits);
  j["quantized_mbit"] = to_mbit(r.quantized_bits);
  j["size_reduction_pct"] = r.size_reduction_pct;
  j["total_mse"] = r.total_mse;
  j["total_bops"] = r.total_bops;
  j["per_layer_mse"] = ordered_json::array();
  j["per_layer_bops"] = ordered_json::array();
  j["layers"] = ordered_json::array();
  for (const auto& l : r.layers) {
    j["per_layer_mse"].push_back(l.mse);
    j["per_layer_bops"].push_back(l.bops);
    ordered_json hist = ordered_json::object();
    for (const auto& [bits, count] : l.bits_histogram) hist[std::to_string(bits)] = count;
    j["layers"].push_back({{"layer_index", l.layer_index},
                           {"params", l.params},
                           {"bits_histogram", hist},
                           {"p", l.breakpoint},
                           {"l", l.bound},
                           {"mse", l.mse},
                           {"bops", l.bops}});
  }
  if (r.config) {
    const auto& c = *r.config;
    j["config"] = {{"alpha", c.importance.alpha},       {"beta", c.importance.beta},
                   {"b_high", c.importance.high_bits},  {"b_low", c.importance.low_bits},
                   {"b_a", c.act_bits},                 {"grid", c.grid_size},
                   {"normalize_layer_score", c.importance.normalize_layer_score}};
  }
  out << j.dump(2) << '\n';
}

void emit_report(const QuantReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot create '" + path.string() + "'");
  emit_report(report, out, format);
  out.flush();
  if (!out) throw Error(Errc::io_failure, "write failed on '" + path.string() + "'");
}

}  // namespace mpq
