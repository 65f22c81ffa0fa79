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

#include <span>

#include "mpq/importance.hpp"
#include "mpq/model_store.hpp"
#include "mpq/piecewise.hpp"

namespace mpq {

struct QuantizeOptions {
  int grid_size = 200;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Encodes one layer. l = max|w|; p comes from the breakpoint search run at
/// `breakpoint_bits` and is shared by every channel; each channel is coded at
/// its own bit-width.
QuantizedLayer quantize_layer(const TensorRecord& tensor, const LayerDescriptor& layer,
                              std::span<const int> channel_bits, int breakpoint_bits,
                              int grid_size = 200);

/// Full Phase-2 pass over a bundle using the bit assignment of `part`.
/// Output is bit-identical for any thread count.
QuantizedModel quantize_model(const ModelBundle& bundle, const ImportancePartition& part,
                              const QuantizeOptions& options = {});

/// Per-weight codes and region flags, in storage order.
std::vector<PiecewiseCode> unpack_layer(const QuantizedLayer& layer);

Eigen::VectorXf decode_layer(const QuantizedLayer& layer);

/// Decodes every layer back into a float bundle with the original names.
ModelBundle dequantize_model(const QuantizedModel& model, unsigned threads = 0);

}  // namespace mpq
