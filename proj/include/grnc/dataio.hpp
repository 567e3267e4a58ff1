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
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "grnc/bytes.hpp"
#include "grnc/error.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

/// 8-bit RGB raster, samples interleaved row-major.
struct ImageBuffer {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> samples;

  bool operator==(const ImageBuffer&) const = default;
};

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

namespace detail {

// Header tokens are separated by whitespace; '#' starts a comment running to
// the end of the line.
class PpmHeaderReader {
 public:
  explicit PpmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9) throw FormatError(FormatError::Kind::kMalformed, "ppm: header value too large");
    }
    if (digits == 0) {
      throw FormatError(pos_ >= bytes_.size() ? FormatError::Kind::kTruncated : FormatError::Kind::kMalformed,
                        "ppm: malformed header");
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size()) throw FormatError(FormatError::Kind::kTruncated, "ppm: truncated header");
    if (!std::isspace(bytes_[pos_])) throw FormatError(FormatError::Kind::kMalformed, "ppm: malformed header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace detail

/// Binary P6 with maxval 255.
inline ImageBuffer load_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError(FormatError::Kind::kBadMagic, "ppm: bad magic");
  }
  detail::PpmHeaderReader header(bytes);
  ImageBuffer img;
  img.width = header.number();
  img.height = header.number();
  const std::size_t maxval = header.number();
  if (img.width == 0 || img.height == 0) throw FormatError(FormatError::Kind::kMalformed, "ppm: empty image");
  if (maxval != 255) throw FormatError(FormatError::Kind::kMalformed, "ppm: unsupported maxval " + std::to_string(maxval));
  const std::size_t offset = header.raster_offset();
  const std::size_t count = 3 * img.width * img.height;
  if (bytes.size() < offset + count) throw FormatError(FormatError::Kind::kTruncated, "ppm: truncated raster");
  img.samples.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                     bytes.begin() + static_cast<std::ptrdiff_t>(offset + count));
  return img;
}

/// Canonical header "P6\n<w> <h>\n255\n".
inline Bytes save_ppm(const ImageBuffer& img) {
  if (img.samples.size() != 3 * img.width * img.height) throw ShapeError("save_ppm: sample count mismatch");
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.samples.begin(), img.samples.end());
  return out;
}

/// 1 x 3 x H x W tensor, value = sample / 255, channels R, G, B.
template <typename T>
Tensor<T> to_tensor(const ImageBuffer& img) {
  Tensor<T> t({1, 3, img.height, img.width});
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        t.at(0, c, y, x) = static_cast<T>(img.samples[(y * img.width + x) * 3 + c]) / T(255);
  return t;
}

/// Quantizes [0, 1] values to 8 bits, rounding half up and clamping.
template <typename T>
ImageBuffer to_image(const Tensor<T>& t) {
  if (t.rank() != 4 || t.dim(0) != 1 || t.dim(1) != 3) {
    throw ShapeError("to_image: expected 1 x 3 x H x W, got " + to_string(t.shape()));
  }
  ImageBuffer img{t.dim(3), t.dim(2), std::vector<std::uint8_t>(3 * t.dim(2) * t.dim(3))};
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::floor(static_cast<double>(t.at(0, c, y, x)) * 255.0 + 0.5);
        img.samples[(y * img.width + x) * 3 + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return img;
}

template <typename T>
struct PaddedTensor {
  Tensor<T> tensor;
  std::size_t height = 0;  // original extents
  std::size_t width = 0;
};

/// Replicates the last row and column until both extents are multiples of
/// `multiple`.
template <typename T>
PaddedTensor<T> pad_to_multiple(const Tensor<T>& t, std::size_t multiple = 16) {
  require_rank4(t, "pad_to_multiple");
  const std::size_t h = t.dim(2), w = t.dim(3);
  const std::size_t ph = (h + multiple - 1) / multiple * multiple, pw = (w + multiple - 1) / multiple * multiple;
  Tensor<T> out({t.dim(0), t.dim(1), ph, pw});
  for (std::size_t n = 0; n < t.dim(0); ++n)
    for (std::size_t c = 0; c < t.dim(1); ++c)
      for (std::size_t y = 0; y < ph; ++y)
        for (std::size_t x = 0; x < pw; ++x) out.at(n, c, y, x) = t.at(n, c, std::min(y, h - 1), std::min(x, w - 1));
  return {std::move(out), h, w};
}

template <typename T>
Tensor<T> crop(const Tensor<T>& t, std::size_t height, std::size_t width) {
  require_rank4(t, "crop");
  if (height > t.dim(2) || width > t.dim(3) || height == 0 || width == 0) {
    throw ShapeError("crop: " + std::to_string(height) + "x" + std::to_string(width) + " outside " +
                     to_string(t.shape()));
  }
  Tensor<T> out({t.dim(0), t.dim(1), height, width});
  for (std::size_t n = 0; n < t.dim(0); ++n)
    for (std::size_t c = 0; c < t.dim(1); ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) out.at(n, c, y, x) = t.at(n, c, y, x);
  return out;
}

}  // namespace grnc
