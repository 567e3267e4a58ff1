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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grnc/bytes.hpp"
#include "grnc/digest.hpp"
#include "grnc/error.hpp"
#include "grnc/model.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

// Stream layout ("GRNB"), little-endian:
//
//   0   magic "GRNB"
//   4   u16 version
//   6   u32 width, u32 height            original image
//   14  u32 padded_width, padded_height  multiples of 16
//   22  u16 iterations
//   24  u16 code_channels
//   26  u8  mode (0 one_shot, 1 additive)
//   27  32-byte model digest
//   59  payload: one block per iteration
//
// Each block packs code_channels x (padded_height / 16) x (padded_width / 16)
// bits channel-major then row-major, +1 -> 1 and -1 -> 0, MSB first, and is
// zero-padded to a whole byte.

struct BitstreamHeader {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kSize = 59;

  std::uint16_t version = kVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t padded_width = 0;
  std::uint32_t padded_height = 0;
  std::uint16_t iterations = 0;
  std::uint16_t code_channels = 0;
  ReconstructionMode mode = ReconstructionMode::kOneShot;
  Digest model_digest{};

  Shape code_shape() const {
    return {1, code_channels, padded_height / ArchitectureConfig::kDownsampling,
            padded_width / ArchitectureConfig::kDownsampling};
  }
  std::size_t bits_per_iteration() const { return shape_size(code_shape()); }
  std::size_t bytes_per_iteration() const { return (bits_per_iteration() + 7) / 8; }

  void validate() const {
    const auto k = ArchitectureConfig::kDownsampling;
    if (width == 0 || height == 0 || padded_width < width || padded_height < height || padded_width % k != 0 ||
        padded_height % k != 0) {
      throw FormatError(FormatError::Kind::kMalformed, "bitstream: inconsistent image dimensions");
    }
    if (iterations < 1 || code_channels < 1) {
      throw FormatError(FormatError::Kind::kMalformed, "bitstream: iterations and code_channels must be >= 1");
    }
  }

  bool operator==(const BitstreamHeader&) const = default;
};

/// Iterations x code bits over padded pixels: iterations * code_channels / 256.
inline double bits_per_pixel(const BitstreamHeader& h) {
  const double pixels = static_cast<double>(h.padded_width) * static_cast<double>(h.padded_height);
  return static_cast<double>(h.iterations) * static_cast<double>(h.bits_per_iteration()) / pixels;
}

/// Same bit count spread over the original (unpadded) pixels.
inline double bits_per_pixel_original(const BitstreamHeader& h) {
  const double pixels = static_cast<double>(h.width) * static_cast<double>(h.height);
  return static_cast<double>(h.iterations) * static_cast<double>(h.bits_per_iteration()) / pixels;
}

template <typename T>
Bytes write_bitstream(const BitstreamHeader& header, std::span<const Tensor<T>> codes) {
  header.validate();
  if (codes.size() != header.iterations) {
    throw ShapeError("write_bitstream: header declares " + std::to_string(header.iterations) + " iterations, got " +
                     std::to_string(codes.size()));
  }
  ByteWriter w;
  w.tag("GRNB");
  w.u16(header.version);
  w.u32(header.width);
  w.u32(header.height);
  w.u32(header.padded_width);
  w.u32(header.padded_height);
  w.u16(header.iterations);
  w.u16(header.code_channels);
  w.u8(static_cast<std::uint8_t>(header.mode));
  w.raw(header.model_digest);

  const Shape shape = header.code_shape();
  for (const Tensor<T>& b : codes) {
    if (b.shape() != shape) {
      throw ShapeError("write_bitstream: code tensor " + to_string(b.shape()) + " does not match header " +
                       to_string(shape));
    }
    Bytes block(header.bytes_per_iteration(), 0);
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (b[k] == T(1)) {
        block[k / 8] |= static_cast<std::uint8_t>(0x80u >> (k % 8));
      } else if (b[k] != T(-1)) {
        throw Error("write_bitstream: code values must be exactly +1 or -1");
      }
    }
    w.raw(block);
  }
  return std::move(w).bytes();
}

template <typename T>
struct DecodedStream {
  BitstreamHeader header;
  std::vector<Tensor<T>> codes;
};

template <typename T>
DecodedStream<T> read_bitstream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "header");
  if (!r.tag_is("GRNB")) throw FormatError(FormatError::Kind::kBadMagic, "bad magic");
  DecodedStream<T> out;
  BitstreamHeader& h = out.header;
  h.version = r.u16();
  if (h.version != BitstreamHeader::kVersion) {
    throw FormatError(FormatError::Kind::kUnsupportedVersion, "unknown version " + std::to_string(h.version));
  }
  h.width = r.u32();
  h.height = r.u32();
  h.padded_width = r.u32();
  h.padded_height = r.u32();
  h.iterations = r.u16();
  h.code_channels = r.u16();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw FormatError(FormatError::Kind::kMalformed, "bitstream: unknown reconstruction mode");
  h.mode = static_cast<ReconstructionMode>(mode);
  const auto digest = r.raw(h.model_digest.size());
  std::copy(digest.begin(), digest.end(), h.model_digest.begin());
  h.validate();

  const std::size_t block = h.bytes_per_iteration();
  if (r.remaining() < block * h.iterations) throw FormatError(FormatError::Kind::kTruncated, "truncated payload");
  if (r.remaining() > block * h.iterations) throw FormatError(FormatError::Kind::kMalformed, "trailing bytes");
  const Shape shape = h.code_shape();
  for (std::size_t t = 0; t < h.iterations; ++t) {
    const auto packed = r.raw(block);
    Tensor<T> b(shape);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = (packed[k / 8] & (0x80u >> (k % 8))) ? T(1) : T(-1);
    out.codes.push_back(std::move(b));
  }
  return out;
}

}  // namespace grnc
