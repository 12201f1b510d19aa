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

#include "troikit/serialize.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "troikit/error.hpp"

namespace troikit {

namespace {

// Hard cap on a single tensor record; guards against corrupt headers.
constexpr std::uint64_t kMaxElements = 1ull << 32;

void write_bytes(std::ostream& os, std::uint64_t v, int n) {
  std::array<char, 8> buf{};
  for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(buf.data(), n);
  if (!os) throw IoError("write failed");
}

std::uint64_t read_bytes(std::istream& is, int n) {
  std::array<unsigned char, 8> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), n);
  if (is.gcount() != n) throw IoError("unexpected end of tensor stream");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) { write_bytes(os, v, 4); }
void write_u64(std::ostream& os, std::uint64_t v) { write_bytes(os, v, 8); }
std::uint32_t read_u32(std::istream& is) { return static_cast<std::uint32_t>(read_bytes(is, 4)); }
std::uint64_t read_u64(std::istream& is) { return read_bytes(is, 8); }

void write_tensor(std::ostream& os, const Tensor& t) {
  write_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) write_u32(os, static_cast<std::uint32_t>(d));
  for (double v : t.data()) write_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

Tensor read_tensor(std::istream& is) {
  const std::uint32_t rank = read_u32(is);
  if (rank > 8) throw IoError("tensor rank " + std::to_string(rank) + " is not supported");
  Shape shape(rank);
  std::uint64_t count = 1;
  for (auto& d : shape) {
    d = read_u32(is);
    count *= d;
    if (count > kMaxElements) throw IoError("tensor record too large");
  }
  std::vector<double> data(count);
  for (auto& v : data) v = static_cast<double>(std::bit_cast<float>(read_u32(is)));
  return Tensor::from(std::move(shape), std::move(data));
}

void save_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_tensor(os, t);
}

Tensor load_tensor_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_tensor(is);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace troikit
