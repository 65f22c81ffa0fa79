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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpq {

enum class Errc {
  bad_magic,
  version_mismatch,
  truncated_payload,
  shape_mismatch,
  non_finite,
  bitstream_length,
  invalid_header,
  io_failure,
  empty_bundle,
  zero_range,
  invalid_argument,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the error families
/// above; the message names the offending layer or tensor where there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mpq
