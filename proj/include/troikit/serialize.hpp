/* Copyright 2026 The troikit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef TROIKIT_SERIALIZE_HPP_
#define TROIKIT_SERIALIZE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "troikit/tensor.hpp"

namespace troikit {

// Binary tensor record: u32 rank, rank x u32 extents, then numel float32
// values in row-major order. All integers and floats are little-endian.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);

void save_tensor_file(const std::string& path, const Tensor& t);
Tensor load_tensor_file(const std::string& path);

// 64-bit FNV-1a, used for config digests.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace troikit

#endif  // TROIKIT_SERIALIZE_HPP_
