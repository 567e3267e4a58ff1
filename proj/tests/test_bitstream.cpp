// Copyright 2026 The GRNC Authors
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

#include <gtest/gtest.h>

#include "grnc/bitstream.hpp"
#include "random_streams.hpp"

namespace grnc {
namespace {

BitstreamHeader header_for(std::uint32_t w, std::uint32_t h, std::uint16_t channels, std::uint16_t iterations) {
  BitstreamHeader header;
  header.width = w;
  header.height = h;
  header.padded_width = (w + 15) / 16 * 16;
  header.padded_height = (h + 15) / 16 * 16;
  header.code_channels = channels;
  header.iterations = iterations;
  return header;
}

std::vector<Tensor<float>> constant_codes(const BitstreamHeader& h, float value) {
  return std::vector<Tensor<float>>(h.iterations, Tensor<float>(h.code_shape(), value));
}

FormatError::Kind read_error(const Bytes& bytes, std::string* message = nullptr) {
  try {
    read_bitstream<float>(bytes);
  } catch (const FormatError& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "expected FormatError";
  return FormatError::Kind::kMalformed;
}

TEST(BitstreamTest, PayloadSizes) {
  const auto h38 = header_for(32, 32, 38, 1);
  EXPECT_EQ(h38.bits_per_iteration(), 152u);
  EXPECT_EQ(write_bitstream<float>(h38, constant_codes(h38, 1)).size(), BitstreamHeader::kSize + 19);
  const auto h32 = header_for(32, 32, 32, 1);
  EXPECT_EQ(h32.bits_per_iteration(), 128u);
  EXPECT_EQ(write_bitstream<float>(h32, constant_codes(h32, -1)).size(), BitstreamHeader::kSize + 16);
  const auto h3 = header_for(33, 17, 3, 4);  // 3 x 2 x 3 = 18 bits -> 3 bytes per iteration
  EXPECT_EQ(write_bitstream<float>(h3, constant_codes(h3, 1)).size(), BitstreamHeader::kSize + 12);
}

TEST(BitstreamTest, BitsPerPixel) {
  EXPECT_EQ(bits_per_pixel(header_for(32, 32, 32, 1)), 0.125);
  EXPECT_EQ(bits_per_pixel(header_for(32, 32, 38, 1)), 0.1484375);
  EXPECT_EQ(bits_per_pixel(header_for(32, 32, 38, 3)), 0.4453125);
  EXPECT_EQ(bits_per_pixel(header_for(768, 512, 38, 8)), 1.1875);
  const auto padded = header_for(24, 16, 38, 1);
  EXPECT_EQ(bits_per_pixel(padded), 0.1484375);
  EXPECT_EQ(bits_per_pixel_original(padded), 38.0 * 2 / (24 * 16));
}

TEST(BitstreamTest, KnownBitLayout) {
  auto h = header_for(32, 16, 2, 1);  // code plane 2 x 1 x 2: four bits
  h.mode = ReconstructionMode::kAdditive;
  h.model_digest[0] = 0xab;
  const std::vector<Tensor<float>> codes{Tensor<float>({1, 2, 1, 2}, {1, -1, 1, 1})};
  const Bytes bytes = write_bitstream<float>(h, codes);
  ASSERT_EQ(bytes.size(), 60u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GRNB");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 32);   // width, little-endian
  EXPECT_EQ(bytes[10], 16);  // height
  EXPECT_EQ(bytes[22], 1);   // iterations
  EXPECT_EQ(bytes[24], 2);   // code channels
  EXPECT_EQ(bytes[26], 1);   // additive
  EXPECT_EQ(bytes[27], 0xab);
  EXPECT_EQ(bytes[59], 0xb0);
}

TEST(BitstreamTest, RandomRoundTrips) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const testing::RandomStream s = testing::random_stream(rng);
    const Bytes bytes = write_bitstream<float>(s.header, s.codes);
    const DecodedStream<float> back = read_bitstream<float>(bytes);
    ASSERT_EQ(back.header, s.header);
    ASSERT_EQ(back.codes, s.codes);
    EXPECT_EQ(write_bitstream<float>(back.header, back.codes), bytes);
  }
}

TEST(BitstreamTest, ReadErrorsAreDistinct) {
  const auto h = header_for(32, 32, 38, 2);
  const Bytes good = write_bitstream<float>(h, constant_codes(h, 1));
  std::string message;

  Bytes bad = good;
  bad[1] = 'X';
  EXPECT_EQ(read_error(bad, &message), FormatError::Kind::kBadMagic);
  EXPECT_EQ(message, "bad magic");

  bad = good;
  bad[4] = 2;
  EXPECT_EQ(read_error(bad, &message), FormatError::Kind::kUnsupportedVersion);
  EXPECT_EQ(message, "unknown version 2");

  bad.assign(good.begin(), good.end() - 1);
  EXPECT_EQ(read_error(bad, &message), FormatError::Kind::kTruncated);
  EXPECT_EQ(message, "truncated payload");

  bad.assign(good.begin(), good.begin() + 20);
  EXPECT_EQ(read_error(bad), FormatError::Kind::kTruncated);

  bad = good;
  bad.push_back(0);
  EXPECT_EQ(read_error(bad), FormatError::Kind::kMalformed);

  bad = good;
  bad[26] = 7;
  EXPECT_EQ(read_error(bad), FormatError::Kind::kMalformed);
}

TEST(BitstreamTest, WriteErrors) {
  const auto h = header_for(32, 32, 4, 2);
  EXPECT_THROW(write_bitstream<float>(h, constant_codes(header_for(32, 32, 4, 1), 1)), ShapeError);
  EXPECT_THROW(write_bitstream<float>(h, constant_codes(header_for(48, 32, 4, 2), 1)), ShapeError);
  EXPECT_THROW(write_bitstream<float>(h, constant_codes(h, 0.5f)), Error);
  auto bad = h;
  bad.padded_width = 24;
  EXPECT_THROW(write_bitstream<float>(bad, constant_codes(h, 1)), FormatError);
}

}  // namespace
}  // namespace grnc
