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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "grnc/error.hpp"

namespace grnc {

using Bytes = std::vector<std::uint8_t>;

/// Little-endian serializer shared by the checkpoint and bitstream formats.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
  void tag(const char (&magic)[5]) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(magic[i]));
  }

  const Bytes& bytes() const& noexcept { return out_; }
  Bytes bytes() && noexcept { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes out_;
};

class ByteReader {
 public:
  /// `what` names the payload in truncation errors.
  ByteReader(std::span<const std::uint8_t> bytes, std::string what) : in_(bytes), what_(std::move(what)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  float f32() { return std::bit_cast<float>(u32()); }

  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  bool tag_is(const char (&magic)[5]) {
    if (remaining() < 4) return false;
    const bool ok = std::memcmp(in_.data() + pos_, magic, 4) == 0;
    if (ok) pos_ += 4;
    return ok;
  }

  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError(FormatError::Kind::kTruncated, "truncated " + what_);
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace grnc
