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

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "test_util.hpp"
#include "troikit/error.hpp"
#include "troikit/serialize.hpp"

namespace troikit {
namespace {

std::string le32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return s;
}

std::string le_float(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  return le32(bits);
}

TEST(Serialize, ByteLayout) {
  std::ostringstream os;
  write_tensor(os, Tensor::from({2, 1}, {1.5, -2.0}));
  const std::string expected = le32(2) + le32(2) + le32(1) + le_float(1.5f) + le_float(-2.0f);
  EXPECT_EQ(os.str(), expected);
}

TEST(Serialize, RoundTripIsBitExactForFloatValues) {
  Rng rng(3);
  std::vector<double> v(3 * 4 * 5);
  for (double& x : v) x = static_cast<double>(static_cast<float>(rng.uniform(-10, 10)));
  const Tensor t = Tensor::from({3, 4, 5}, v);
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor back = read_tensor(ss);
  EXPECT_EQ(back.shape(), t.shape());
  EXPECT_EQ(testing::values(back), v);
}

TEST(Serialize, ScalarRankZero) {
  std::stringstream ss;
  write_tensor(ss, Tensor::from({}, {7.0}));
  const Tensor back = read_tensor(ss);
  EXPECT_EQ(back.rank(), 0u);
  EXPECT_EQ(back.item(), 7.0);
}

TEST(Serialize, TruncatedStreamIsIoError) {
  std::ostringstream os;
  write_tensor(os, Tensor::from({4}, {1, 2, 3, 4}));
  std::string bytes = os.str();
  bytes.resize(bytes.size() - 3);
  std::istringstream is(bytes);
  EXPECT_THROW(read_tensor(is), IoError);
}

TEST(Serialize, FileRoundTrip) {
  testing::TempDir dir("ser");
  const std::string path = dir.str() + "/t.tensor";
  const Tensor t = Tensor::from({2, 2}, {0.25, 0.5, 0.75, 1.0});
  save_tensor_file(path, t);
  EXPECT_EQ(testing::values(load_tensor_file(path)), testing::values(t));
}

TEST(Serialize, MissingFileIsIoError) { EXPECT_THROW(load_tensor_file("/nonexistent/troikit/x.tensor"), IoError); }

TEST(Serialize, IntegersLittleEndian) {
  std::stringstream ss;
  write_u32(ss, 0x01020304u);
  write_u64(ss, 0x0102030405060708ull);
  const std::string s = ss.str();
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x04);
  EXPECT_EQ(static_cast<unsigned char>(s[4]), 0x08);
  EXPECT_EQ(read_u32(ss), 0x01020304u);
  EXPECT_EQ(read_u64(ss), 0x0102030405060708ull);
}

TEST(Serialize, Fnv1aReferenceValues) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

}  // namespace
}  // namespace troikit
