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

#include "mpq/bitstream.hpp"

#include <algorithm>
#include <string>

#include "mpq/error.hpp"

namespace mpq {

void BitWriter::write(std::uint32_t value, unsigned width) {
  if (width == 0 || width > 32) {
    throw Error(Errc::invalid_argument, "bit field width " + std::to_string(width));
  }
  std::uint64_t v = value;
  if (width < 32) v &= (std::uint64_t{1} << width) - 1;
  unsigned left = width;
  while (left > 0) {
    const unsigned offset = static_cast<unsigned>(nbits_ & 7);
    if (offset == 0) bytes_.push_back(0);
    const unsigned take = std::min(left, 8 - offset);
    bytes_.back() |= static_cast<std::uint8_t>((v & ((1u << take) - 1)) << offset);
    v >>= take;
    left -= take;
    nbits_ += take;
  }
}

std::uint32_t BitReader::read(unsigned width) {
  if (width == 0 || width > 32) {
    throw Error(Errc::invalid_argument, "bit field width " + std::to_string(width));
  }
  if (width > remaining()) {
    throw Error(Errc::bitstream_length,
                "read of " + std::to_string(width) + " bits at position " +
                    std::to_string(pos_) + " past stream end " + std::to_string(nbits_));
  }
  std::uint64_t out = 0;
  unsigned got = 0;
  while (got < width) {
    const unsigned offset = static_cast<unsigned>(pos_ & 7);
    const unsigned take = std::min(width - got, 8 - offset);
    const std::uint64_t chunk = (bytes_[pos_ >> 3] >> offset) & ((1u << take) - 1);
    out |= chunk << got;
    got += take;
    pos_ += take;
  }
  return static_cast<std::uint32_t>(out);
}

}  // namespace mpq
