// Copyright 2026 The PRSNet-Desk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prs/tensor.hpp"

// PRST binary tensor format, little-endian throughout:
//   "PRST" | u32 version | u8 dtype (0=f32, 1=f64) | u32 rank | rank x u32 extents | data
namespace prs {
inline namespace PRS_REAL_ABI {

inline constexpr std::uint32_t kPrstVersion = 1;

std::vector<std::uint8_t> encode_prst(const Tensor& t);

/// Decodes a PRST buffer. Payloads stored in the other precision are
/// converted; `source` only labels error messages.
Tensor decode_prst(std::span<const std::uint8_t> bytes, const std::string& source = "<buffer>");

void write_prst(const std::filesystem::path& path, const Tensor& t);
Tensor read_prst(const std::filesystem::path& path);

}  // namespace PRS_REAL_ABI
}  // namespace prs
