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

#include "mpq/model_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "json.hpp"
#include "mpq/bitstream.hpp"
#include "mpq/error.hpp"

namespace mpq {

using nlohmann::json;

namespace {

constexpr std::size_t kPreambleBytes = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes[at + i]} << (8 * i);
  return v;
}

std::vector<std::uint8_t> envelope(std::string_view magic, const json& header,
                                   std::span<const std::uint8_t> payload) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(kPreambleBytes + text.size() + payload.size());
  out.insert(out.end(), magic.begin(), magic.end());
  put_u32(out, kFormatVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

struct Envelope {
  json header;
  std::span<const std::uint8_t> payload;
};

Envelope open_envelope(std::span<const std::uint8_t> bytes, std::string_view magic) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw Error(Errc::bad_magic, "expected magic " + std::string(magic));
  }
  if (bytes.size() < kPreambleBytes) {
    throw Error(Errc::truncated_payload, "file shorter than the 16-byte preamble");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kFormatVersion) {
    throw Error(Errc::version_mismatch, "format version " + std::to_string(version) +
                                            ", expected " + std::to_string(kFormatVersion));
  }
  const std::uint64_t header_len = get_le(bytes, 8, 8);
  if (header_len > bytes.size() - kPreambleBytes) {
    throw Error(Errc::truncated_payload, "header length " + std::to_string(header_len) +
                                             " exceeds file size");
  }
  Envelope env;
  const auto* first = reinterpret_cast<const char*>(bytes.data() + kPreambleBytes);
  try {
    env.header = json::parse(first, first + header_len);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_header, e.what());
  }
  if (!env.header.is_object()) throw Error(Errc::invalid_header, "header is not a JSON object");
  env.payload = bytes.subspan(kPreambleBytes + header_len);
  return env;
}

// Wraps nlohmann lookups so malformed headers surface as invalid-header.
template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_header, where + ": field '" + key + "': " + e.what());
  }
}

std::span<const std::uint8_t> slice(std::span<const std::uint8_t> payload, std::uint64_t offset,
                                    std::uint64_t nbytes, const std::string& where) {
  if (offset > payload.size() || nbytes > payload.size() - offset) {
    throw Error(Errc::truncated_payload,
                where + ": needs bytes [" + std::to_string(offset) + ", " +
                    std::to_string(offset + nbytes) + ") but payload has " +
                    std::to_string(payload.size()));
  }
  return payload.subspan(offset, nbytes);
}

json layer_to_json(const LayerDescriptor& layer) {
  return json{{"layer_index", layer.index},
              {"kind", std::string(to_string(layer.shape.kind))},
              {"m", layer.shape.out_channels},
              {"n", layer.shape.in_channels},
              {"k", layer.shape.kernel_size},
              {"tensor_name", layer.tensor_name}};
}

LayerDescriptor layer_from_json(const json& j, std::size_t position) {
  const std::string where = "layer " + std::to_string(position);
  LayerDescriptor layer;
  layer.index = field<std::size_t>(j, "layer_index", where);
  try {
    layer.shape.kind = parse_layer_kind(field<std::string>(j, "kind", where));
  } catch (const Error& e) {
    throw Error(Errc::invalid_header, where + ": " + e.what());
  }
  layer.shape.out_channels = field<std::int64_t>(j, "m", where);
  layer.shape.in_channels = field<std::int64_t>(j, "n", where);
  layer.shape.kernel_size = field<std::int64_t>(j, "k", where);
  layer.tensor_name = field<std::string>(j, "tensor_name", where);
  return layer;
}

json config_to_json(const QuantConfig& c) {
  return json{{"alpha", c.importance.alpha},
              {"beta", c.importance.beta},
              {"bits_important", c.importance.high_bits},
              {"bits_other", c.importance.low_bits},
              {"normalize_layer_score", c.importance.normalize_layer_score},
              {"act_bits", c.act_bits},
              {"grid", c.grid_size}};
}

QuantConfig config_from_json(const json& j) {
  const std::string where = "config";
  QuantConfig c;
  c.importance.alpha = field<double>(j, "alpha", where);
  c.importance.beta = field<double>(j, "beta", where);
  c.importance.high_bits = field<int>(j, "bits_important", where);
  c.importance.low_bits = field<int>(j, "bits_other", where);
  c.importance.normalize_layer_score = field<bool>(j, "normalize_layer_score", where);
  c.act_bits = field<int>(j, "act_bits", where);
  c.grid_size = field<int>(j, "grid", where);
  return c;
}

void check_layer_indices(const std::vector<LayerDescriptor>& layers) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].index != i) {
      throw Error(Errc::invalid_header, "layer at position " + std::to_string(i) +
                                            " has layer_index " +
                                            std::to_string(layers[i].index));
    }
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) noexcept {
  return kind == LayerKind::conv ? "conv" : "fc";
}

LayerKind parse_layer_kind(std::string_view text) {
  if (text == "conv") return LayerKind::conv;
  if (text == "fc") return LayerKind::fc;
  throw Error(Errc::invalid_argument, "unknown layer kind '" + std::string(text) + "'");
}

std::vector<std::int64_t> LayerShape::tensor_shape() const {
  if (kind == LayerKind::fc) return {out_channels, in_channels};
  return {out_channels, in_channels, kernel_size, kernel_size};
}

std::int64_t TensorRecord::element_count() const noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

Eigen::Map<const RowMajorMatrixXf> TensorRecord::channels(std::int64_t out_channels) const {
  const Eigen::Index rows = out_channels;
  const Eigen::Index cols = rows == 0 ? 0 : data.size() / rows;
  return {data.data(), rows, cols};
}

bool TensorRecord::operator==(const TensorRecord& other) const {
  return name == other.name && shape == other.shape && data.size() == other.data.size() &&
         std::memcmp(data.data(), other.data.data(), sizeof(float) * data.size()) == 0;
}

const TensorRecord& ModelBundle::tensor_for(const LayerDescriptor& layer) const {
  const auto it = tensors.find(layer.tensor_name);
  if (it == tensors.end()) {
    throw Error(Errc::invalid_header, "layer " + std::to_string(layer.index) +
                                          " references missing tensor '" + layer.tensor_name +
                                          "'");
  }
  return it->second;
}

std::int64_t ModelBundle::weight_count() const noexcept {
  std::int64_t total = 0;
  for (const auto& layer : layers) total += layer.shape.weight_count();
  return total;
}

void ModelBundle::validate() const {
  check_layer_indices(layers);
  std::map<std::string, std::size_t> users;
  for (const auto& layer : layers) {
    const auto& s = layer.shape;
    if (s.out_channels <= 0 || s.in_channels <= 0 || s.kernel_size <= 0 ||
        (s.kind == LayerKind::fc && s.kernel_size != 1)) {
      throw Error(Errc::shape_mismatch,
                  "layer " + std::to_string(layer.index) + " has invalid geometry");
    }
    const TensorRecord& t = tensor_for(layer);
    if (t.shape != s.tensor_shape()) {
      throw Error(Errc::shape_mismatch, "layer " + std::to_string(layer.index) +
                                            " geometry disagrees with tensor '" + t.name +
                                            "' shape");
    }
    if (++users[layer.tensor_name] > 1) {
      throw Error(Errc::invalid_header,
                  "tensor '" + layer.tensor_name + "' referenced by more than one layer");
    }
  }
  for (const auto& [name, t] : tensors) {
    if (name != t.name) throw Error(Errc::invalid_header, "tensor key '" + name + "' mismatch");
    for (auto d : t.shape) {
      if (d <= 0) throw Error(Errc::shape_mismatch, "tensor '" + name + "' has a non-positive dim");
    }
    if (t.element_count() != t.data.size()) {
      throw Error(Errc::shape_mismatch, "tensor '" + name + "' holds " +
                                            std::to_string(t.data.size()) + " values, shape needs " +
                                            std::to_string(t.element_count()));
    }
    if (!t.data.allFinite()) {
      throw Error(Errc::non_finite, "tensor '" + name + "' contains NaN or Inf");
    }
  }
}

std::vector<std::uint8_t> serialize_bundle(const ModelBundle& bundle) {
  json header;
  header["model_name"] = bundle.model_name;
  header["layers"] = json::array();
  for (const auto& layer : bundle.layers) header["layers"].push_back(layer_to_json(layer));
  header["tensors"] = json::object();

  std::vector<std::uint8_t> payload;
  for (const auto& [name, t] : bundle.tensors) {
    const std::uint64_t nbytes = sizeof(float) * static_cast<std::uint64_t>(t.data.size());
    header["tensors"][name] = json{
        {"shape", t.shape}, {"dtype", "f32"}, {"offset", payload.size()}, {"nbytes", nbytes}};
    for (float v : t.data) put_u32(payload, std::bit_cast<std::uint32_t>(v));
  }
  return envelope(kBundleMagic, header, payload);
}

ModelBundle parse_bundle(std::span<const std::uint8_t> bytes) {
  const Envelope env = open_envelope(bytes, kBundleMagic);
  const json& h = env.header;
  ModelBundle bundle;
  bundle.model_name = field<std::string>(h, "model_name", "header");
  const json layers = field<json>(h, "layers", "header");
  const json tensors = field<json>(h, "tensors", "header");
  if (!layers.is_array() || !tensors.is_object()) {
    throw Error(Errc::invalid_header, "'layers' must be an array and 'tensors' an object");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    bundle.layers.push_back(layer_from_json(layers[i], i));
  }
  for (const auto& [name, entry] : tensors.items()) {
    const std::string where = "tensor '" + name + "'";
    TensorRecord t;
    t.name = name;
    t.shape = field<std::vector<std::int64_t>>(entry, "shape", where);
    if (field<std::string>(entry, "dtype", where) != "f32") {
      throw Error(Errc::invalid_header, where + ": unsupported dtype");
    }
    for (auto d : t.shape) {
      if (d <= 0) throw Error(Errc::shape_mismatch, where + " has a non-positive dim");
    }
    const auto offset = field<std::uint64_t>(entry, "offset", where);
    const auto nbytes = field<std::uint64_t>(entry, "nbytes", where);
    if (nbytes != sizeof(float) * static_cast<std::uint64_t>(t.element_count())) {
      throw Error(Errc::shape_mismatch, where + ": nbytes " + std::to_string(nbytes) +
                                            " does not match shape element count " +
                                            std::to_string(t.element_count()));
    }
    const auto raw = slice(env.payload, offset, nbytes, where);
    t.data.resize(static_cast<Eigen::Index>(nbytes / sizeof(float)));
    for (Eigen::Index i = 0; i < t.data.size(); ++i) {
      t.data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(raw, 4 * i, 4)));
    }
    bundle.tensors.emplace(name, std::move(t));
  }
  bundle.validate();
  return bundle;
}

std::uint64_t QuantizedLayer::expected_code_bits() const {
  const auto per_channel = static_cast<std::uint64_t>(layer.shape.channel_size());
  std::uint64_t bits = 0;
  for (int b : channel_bits) bits += per_channel * static_cast<std::uint64_t>(b);
  return bits;
}

void QuantizedLayer::validate() const {
  const std::string where = "quantized layer " + std::to_string(layer.index);
  const auto m = static_cast<std::size_t>(layer.shape.out_channels);
  if (channel_bits.size() != m || dense_scales.size() != m || sparse_scales.size() != m) {
    throw Error(Errc::shape_mismatch, where + ": per-channel lists must have " +
                                          std::to_string(m) + " entries");
  }
  for (int b : channel_bits) {
    if (b < 2 || b > 32) {
      throw Error(Errc::invalid_header, where + ": channel bit-width " + std::to_string(b));
    }
  }
  if (!std::isfinite(breakpoint) || !std::isfinite(bound)) {
    throw Error(Errc::non_finite, where + ": non-finite range parameters");
  }
  const bool degenerate = bound == 0.0 && breakpoint == 0.0;
  if (!degenerate && !(breakpoint > 0.0 && breakpoint <= bound / 2)) {
    throw Error(Errc::invalid_header, where + ": breakpoint outside (0, l/2]");
  }
  if (mask_nbits != static_cast<std::uint64_t>(layer.shape.weight_count())) {
    throw Error(Errc::bitstream_length, where + ": region mask declares " +
                                            std::to_string(mask_nbits) + " bits");
  }
  if (codes_nbits != expected_code_bits()) {
    throw Error(Errc::bitstream_length, where + ": code stream declares " +
                                            std::to_string(codes_nbits) + " bits, expected " +
                                            std::to_string(expected_code_bits()));
  }
  if (codes.size() != padded_bytes(codes_nbits) || region_mask.size() != padded_bytes(mask_nbits)) {
    throw Error(Errc::bitstream_length, where + ": stream byte length disagrees with bit length");
  }
}

void QuantizedModel::validate() const {
  std::vector<LayerDescriptor> descriptors;
  for (const auto& q : layers) descriptors.push_back(q.layer);
  check_layer_indices(descriptors);
  for (const auto& q : layers) q.validate();
  if (config) config->validate();
}

std::vector<std::uint8_t> serialize_quantized(const QuantizedModel& model) {
  json header;
  header["model_name"] = model.source_model_name;
  if (model.config) header["config"] = config_to_json(*model.config);
  header["layers"] = json::array();

  std::vector<std::uint8_t> payload;
  for (const auto& q : model.layers) {
    json j = layer_to_json(q.layer);
    j["p"] = q.breakpoint;
    j["l"] = q.bound;
    j["channel_bits"] = q.channel_bits;
    j["scales_dense"] = q.dense_scales;
    j["scales_sparse"] = q.sparse_scales;
    j["codes_offset"] = payload.size();
    j["codes_nbits"] = q.codes_nbits;
    payload.insert(payload.end(), q.codes.begin(), q.codes.end());
    j["mask_offset"] = payload.size();
    j["mask_nbits"] = q.mask_nbits;
    payload.insert(payload.end(), q.region_mask.begin(), q.region_mask.end());
    header["layers"].push_back(std::move(j));
  }
  return envelope(kQuantizedMagic, header, payload);
}

QuantizedModel parse_quantized(std::span<const std::uint8_t> bytes) {
  const Envelope env = open_envelope(bytes, kQuantizedMagic);
  const json& h = env.header;
  QuantizedModel model;
  model.source_model_name = field<std::string>(h, "model_name", "header");
  if (h.contains("config")) model.config = config_from_json(h.at("config"));
  const json layers = field<json>(h, "layers", "header");
  if (!layers.is_array()) throw Error(Errc::invalid_header, "'layers' must be an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const json& j = layers[i];
    const std::string where = "quantized layer " + std::to_string(i);
    QuantizedLayer q;
    q.layer = layer_from_json(j, i);
    q.breakpoint = field<double>(j, "p", where);
    q.bound = field<double>(j, "l", where);
    q.channel_bits = field<std::vector<int>>(j, "channel_bits", where);
    q.dense_scales = field<std::vector<double>>(j, "scales_dense", where);
    q.sparse_scales = field<std::vector<double>>(j, "scales_sparse", where);
    q.codes_nbits = field<std::uint64_t>(j, "codes_nbits", where);
    q.mask_nbits = field<std::uint64_t>(j, "mask_nbits", where);
    const auto codes = slice(env.payload, field<std::uint64_t>(j, "codes_offset", where),
                             padded_bytes(q.codes_nbits), where + " codes");
    const auto mask = slice(env.payload, field<std::uint64_t>(j, "mask_offset", where),
                            padded_bytes(q.mask_nbits), where + " region mask");
    q.codes.assign(codes.begin(), codes.end());
    q.region_mask.assign(mask.begin(), mask.end());
    model.layers.push_back(std::move(q));
  }
  model.validate();
  return model;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io_failure, "read failed on '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(Errc::io_failure, "write failed on '" + path.string() + "'");
}

ModelBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(read_file(path)); }

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  bundle.validate();
  write_file(path, serialize_bundle(bundle));
}

QuantizedModel load_quantized(const std::filesystem::path& path) {
  return parse_quantized(read_file(path));
}

void save_quantized(const QuantizedModel& model, const std::filesystem::path& path) {
  model.validate();
  write_file(path, serialize_quantized(model));
}

std::string peek_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "'");
  std::string magic(4, '\0');
  in.read(magic.data(), 4);
  if (in.gcount() != 4) throw Error(Errc::bad_magic, "'" + path.string() + "' is too short");
  return magic;
}

}  // namespace mpq
