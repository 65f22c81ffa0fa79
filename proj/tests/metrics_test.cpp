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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mpq/importance.hpp"
#include "mpq/quantize_model.hpp"
#include "mpq/synth.hpp"
#include "test_util.hpp"

using namespace mpq;

TEST_CASE("size arithmetic at the 25.5M-parameter scale") {
  // One fc layer of 25.5e6 weights.
  const std::vector<LayerShape> layers{{LayerKind::fc, 25500, 1000, 1}};
  CHECK(to_mbit(uniform_size_bits(layers, 32)) == 816.0);
  CHECK(to_mbit(uniform_size_bits(layers, 8)) == 204.0);
  CHECK(size_reduction_pct(uniform_size_bits(layers, 8), uniform_size_bits(layers, 32)) == 75.0);
}

TEST_CASE("half 8-bit, half 2-bit over 100 weights is 500 bits") {
  const std::vector<LayerShape> layers{{LayerKind::fc, 10, 10, 1}};
  const std::vector<std::vector<int>> bits{{8, 8, 8, 8, 8, 2, 2, 2, 2, 2}};
  CHECK(model_size_bits(layers, bits) == 500);
  CHECK_THROWS_AS(model_size_bits(layers, {{8, 8}}), Error);
}

TEST_CASE("uniform reductions are exact") {
  const std::vector<LayerShape> layers{{LayerKind::conv, 7, 3, 3}, {LayerKind::fc, 5, 11, 1}};
  const auto base = uniform_size_bits(layers, 32);
  CHECK(size_reduction_pct(uniform_size_bits(layers, 8), base) == 75.0);
  CHECK(size_reduction_pct(uniform_size_bits(layers, 6), base) == 81.25);
  CHECK(size_reduction_pct(uniform_size_bits(layers, 4), base) == 87.5);
}

TEST_CASE("BOPs of one layer") {
  // 2304 * (64 + 8 + 8 log2 144)
  const double expected = 2304.0 * (64.0 + 8.0 + 8.0 * std::log2(144.0));
  CHECK(bops_layer(16, 16, 3, 8, 8) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(bops_layer(16, 16, 3, 8, 8) == doctest::Approx(2.980e5).epsilon(1e-3));
  CHECK(bops_layer(1, 1, 1, 1, 1) == 2.0);
  CHECK(bops_layer(32, 16, 3, 8, 4) == doctest::Approx(2 * bops_layer(16, 16, 3, 8, 4)).epsilon(1e-15));
}

TEST_CASE("mixed-precision BOPs split the output channels") {
  const LayerShape s{LayerKind::conv, 16, 16, 3};
  const std::vector<int> uniform8(16, 8);
  CHECK(bops_layer_mixed(s, uniform8, 8) == bops_layer(16, 16, 3, 8, 8));
  std::vector<int> half(16, 8);
  std::fill(half.begin() + 8, half.end(), 2);
  CHECK(bops_layer_mixed(s, half, 8) ==
        doctest::Approx((bops_layer(16, 16, 3, 8, 8) + bops_layer(16, 16, 3, 8, 2)) / 2).epsilon(1e-14));
}

TEST_CASE("model BOPs: uniform sum and MP below SP") {
  const std::vector<LayerShape> layers{{LayerKind::conv, 8, 3, 3}, {LayerKind::conv, 16, 8, 3},
                                       {LayerKind::fc, 10, 16, 1}};
  std::vector<std::vector<int>> bits;
  double direct = 0;
  for (const auto& s : layers) {
    bits.emplace_back(static_cast<std::size_t>(s.out_channels), 6);
    direct += bops_layer(static_cast<double>(s.out_channels), static_cast<double>(s.in_channels),
                         static_cast<double>(s.kernel_size), 8, 6);
  }
  CHECK(bops_model(layers, bits, 8) == doctest::Approx(direct).epsilon(1e-15));
  auto mp = bits;
  mp[1][3] = 2;
  CHECK(bops_model(layers, mp, 8) < bops_model(layers, bits, 8));
}

TEST_CASE("MSE report") {
  std::mt19937_64 rng(1);
  const ModelBundle zeros = mpq::testing::make_bundle({3, 2}, 4, [](std::size_t, Eigen::Index) { return 0.0f; });
  const auto zq = quantize_model(zeros, partition(zeros, {50, 0.5, 8, 2, false}));
  const MseReport zr = mse_report(zeros, zq);
  CHECK(zr.total.mse() == 0.0);
  CHECK(zr.total.count == 20);

  // A grid that represents every weight exactly: w in {0, +-p, +-l}.
  const ModelBundle exact = mpq::testing::make_bundle({1}, 5, [](std::size_t, Eigen::Index j) {
    const float v[] = {0.0f, 0.5f, -0.5f, 1.0f, -1.0f};
    return v[j];
  });
  const auto eq = quantize_model(exact, partition(exact, {100, 1.0, 8, 8, false}));
  CHECK(eq.layers[0].breakpoint == 0.5);
  CHECK(mse_report(exact, eq).total.mse() < 1e-24);

  const ModelBundle b = mpq::testing::random_bundle(rng, 4, 8, 16);
  const auto q = quantize_model(b, partition(b, {50, 0.5, 4, 2, false}));
  const MseReport r = mse_report(b, q);
  const ModelBundle d = dequantize_model(q);
  double sum = 0;
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    const auto& w = b.tensor_for(b.layers[i]).data;
    const auto& x = d.tensor_for(b.layers[i]).data;
    double s = 0;
    for (Eigen::Index j = 0; j < w.size(); ++j) s += std::pow(double(x[j]) - double(w[j]), 2);
    CHECK(r.layers[i].mse() == doctest::Approx(s / w.size()).epsilon(1e-12));
    sum += s;
    n += static_cast<std::uint64_t>(w.size());
  }
  CHECK(r.total.mse() == doctest::Approx(sum / n).epsilon(1e-12));
}

TEST_CASE("report JSON and CSV") {
  const ArchDescriptor arch{"r", {{LayerKind::conv, 8, 2, 3}, {LayerKind::fc, 4, 8, 1}}};
  const ModelBundle b = gen_model(arch, {DistKind::gaussian, 0.1}, 2);
  QuantizedModel q = quantize_model(b, partition(b, {50, 0.75, 8, 2, false}));
  q.config = QuantConfig{{50, 0.75, 8, 2, false}, 8, 200};
  const QuantReport r = make_report(b, q);

  CHECK(r.baseline_bits == 32u * (8 * 18 + 32));
  CHECK(r.quantized_bits == model_size_bits(b, [&] {
          std::vector<std::vector<int>> bits;
          for (const auto& l : q.layers) bits.push_back(l.channel_bits);
          return bits;
        }()));
  CHECK(r.size_reduction_pct > 0);
  CHECK(r.size_reduction_pct < 100);
  CHECK(r.overhead_bits == (144 + 32) + 2 * 64 + 12 * 72);

  std::ostringstream js;
  emit_report(r, js, ReportFormat::json);
  const auto j = nlohmann::json::parse(js.str());
  for (const char* key : {"baseline_bits", "quantized_bits_paper", "overhead_bits", "size_reduction_pct",
                          "per_layer_mse", "total_bops", "per_layer_bops", "config"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["config"]["b_high"] == 8);
  CHECK(j["config"]["b_a"] == 8);
  CHECK(j["per_layer_mse"].size() == 2);

  std::ostringstream csv;
  emit_report(r, csv, ReportFormat::csv);
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "layer_index,params,bits_histogram,p,l,mse,bops");
  std::getline(lines, row);
  CHECK(row.rfind("0,144,", 0) == 0);

  std::ostringstream again;
  emit_report(make_report(b, q), again, ReportFormat::json);
  CHECK(again.str() == js.str());
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1e-300, 123456.789, 2.0 / 3}) CHECK(std::stod(format_double(v)) == v);
}
