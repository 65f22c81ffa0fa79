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

#include "mpq/error.hpp"

namespace mpq {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::bad_magic: return "bad-magic";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::truncated_payload: return "truncated-payload";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::non_finite: return "non-finite";
    case Errc::bitstream_length: return "bitstream-length";
    case Errc::invalid_header: return "invalid-header";
    case Errc::io_failure: return "io-failure";
    case Errc::empty_bundle: return "empty-bundle";
    case Errc::zero_range: return "zero-range";
    case Errc::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace mpq
