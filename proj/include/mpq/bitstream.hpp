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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mpq {

/// Appends fixed-width fields LSB-first: bit j of a field written at stream
/// position pos lands in byte (pos + j) / 8, bit (pos + j) % 8. The final
/// byte is zero-padded.
class BitWriter {
 public:
  void write(std::uint32_t value, unsigned width);

  std::uint64_t bit_size() const noexcept { return nbits_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> release() noexcept { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t nbits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t nbits) noexcept
      : bytes_(bytes), nbits_(nbits) {}

  /// Throws Errc::bitstream_length when reading past the declared length.
  std::uint32_t read(unsigned width);

  std::uint64_t position() const noexcept { return pos_; }
  std::uint64_t remaining() const noexcept { return nbits_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t nbits_;
  std::uint64_t pos_ = 0;
};

constexpr std::size_t padded_bytes(std::uint64_t nbits) noexcept {
  return static_cast<std::size_t>((nbits + 7) / 8);
}

/// Field layout of one weight: sign in the most significant bit of a
/// width-bit field, magnitude index in the low width-1 bits.
constexpr std::uint32_t pack_sign_magnitude(bool negative, std::uint32_t magnitude,
                                            unsigned width) noexcept {
  return (static_cast<std::uint32_t>(negative) << (width - 1)) | magnitude;
}

}  // namespace mpq
