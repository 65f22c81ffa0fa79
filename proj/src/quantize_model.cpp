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

#include "mpq/quantize_model.hpp"

#include <string>

#include "mpq/bitstream.hpp"
#include "mpq/error.hpp"
#include "mpq/parallel.hpp"

namespace mpq {

QuantizedLayer quantize_layer(const TensorRecord& tensor, const LayerDescriptor& layer,
                              std::span<const int> channel_bits, int breakpoint_bits, int grid_size) {
  const auto m = static_cast<std::size_t>(layer.shape.out_channels);
  if (channel_bits.size() != m) {
    throw Error(Errc::shape_mismatch, "layer " + std::to_string(layer.index) + ": " +
                                          std::to_string(channel_bits.size()) +
                                          " channel bit-widths for " + std::to_string(m) +
                                          " channels");
  }
  if (tensor.data.size() != layer.shape.weight_count()) {
    throw Error(Errc::shape_mismatch, "layer " + std::to_string(layer.index) +
                                          " tensor size disagrees with its geometry");
  }

  QuantizedLayer q;
  q.layer = layer;
  q.channel_bits.assign(channel_bits.begin(), channel_bits.end());

  const EmpiricalCdf cdf(tensor.data);
  if (const auto bp = find_breakpoint(cdf, breakpoint_bits, grid_size)) {
    q.bound = cdf.max_abs();
    q.breakpoint = bp->p;
  }

  const auto weights = tensor.channels(layer.shape.out_channels);
  BitWriter codes;
  BitWriter mask;
  for (std::size_t c = 0; c < m; ++c) {
    const auto params = PiecewiseParams<double>::make(q.bound, q.breakpoint, channel_bits[c]);
    q.dense_scales.push_back(params.dense_scale());
    q.sparse_scales.push_back(params.sparse_scale());
    const auto width = static_cast<unsigned>(params.bits);
    const auto row = weights.row(static_cast<Eigen::Index>(c));
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      const PiecewiseCode code = quantize_piecewise(static_cast<double>(row[j]), params);
      codes.write(pack_sign_magnitude(code.negative, code.magnitude, width), width);
      mask.write(static_cast<std::uint32_t>(code.region), 1);
    }
  }
  q.codes_nbits = codes.bit_size();
  q.codes = codes.release();
  q.mask_nbits = mask.bit_size();
  q.region_mask = mask.release();
  return q;
}

QuantizedModel quantize_model(const ModelBundle& bundle, const ImportancePartition& part,
                              const QuantizeOptions& options) {
  if (part.channel_bits.size() != bundle.layers.size()) {
    throw Error(Errc::invalid_argument, "partition was computed for a different model");
  }
  QuantizedModel out;
  out.source_model_name = bundle.model_name;
  out.layers.resize(bundle.layers.size());
  parallel_for(bundle.layers.size(), options.threads, [&](std::size_t i) {
    const auto& layer = bundle.layers[i];
    out.layers[i] = quantize_layer(bundle.tensor_for(layer), layer, part.channel_bits[i],
                                   part.config.high_bits, options.grid_size);
  });
  return out;
}

std::vector<PiecewiseCode> unpack_layer(const QuantizedLayer& layer) {
  layer.validate();
  BitReader codes(layer.codes, layer.codes_nbits);
  BitReader mask(layer.region_mask, layer.mask_nbits);
  const auto per_channel = static_cast<std::size_t>(layer.layer.shape.channel_size());
  std::vector<PiecewiseCode> out;
  out.reserve(static_cast<std::size_t>(layer.mask_nbits));
  for (int bits : layer.channel_bits) {
    const auto width = static_cast<unsigned>(bits);
    const std::uint32_t magnitude_mask = (std::uint32_t{1} << (width - 1)) - 1;
    for (std::size_t j = 0; j < per_channel; ++j) {
      const std::uint32_t field = codes.read(width);
      PiecewiseCode code;
      code.negative = (field >> (width - 1)) & 1u;
      code.magnitude = field & magnitude_mask;
      code.region = mask.read(1) ? Region::sparse : Region::dense;
      out.push_back(code);
    }
  }
  return out;
}

Eigen::VectorXf decode_layer(const QuantizedLayer& layer) {
  const std::vector<PiecewiseCode> codes = unpack_layer(layer);
  const auto per_channel = static_cast<std::size_t>(layer.layer.shape.channel_size());
  Eigen::VectorXf out(static_cast<Eigen::Index>(codes.size()));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const std::size_t c = i / per_channel;
    out[static_cast<Eigen::Index>(i)] = static_cast<float>(dequantize_piecewise(
        codes[i], layer.breakpoint, layer.dense_scales[c], layer.sparse_scales[c]));
  }
  return out;
}

ModelBundle dequantize_model(const QuantizedModel& model, unsigned threads) {
  ModelBundle out;
  out.model_name = model.source_model_name;
  std::vector<TensorRecord> tensors(model.layers.size());
  parallel_for(model.layers.size(), threads, [&](std::size_t i) {
    const auto& q = model.layers[i];
    tensors[i].name = q.layer.tensor_name;
    tensors[i].shape = q.layer.shape.tensor_shape();
    tensors[i].data = decode_layer(q);
  });
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    out.layers.push_back(model.layers[i].layer);
    out.tensors.emplace(tensors[i].name, std::move(tensors[i]));
  }
  out.validate();
  return out;
}

}  // namespace mpq
