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
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "grnc/bitstream.hpp"
#include "grnc/codec.hpp"
#include "grnc/dataio.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(peak^2 / MSE), capped at 100 dB when the inputs are identical.
template <typename T>
double psnr(const Tensor<T>& a, const Tensor<T>& b, double peak = 1.0) {
  require_same_shape(a, b, "psnr");
  double sse = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

inline constexpr std::array<double, 5> kMsSsimWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

namespace detail {

struct Plane {
  std::size_t height = 0, width = 0;
  std::vector<double> v;

  double operator()(std::size_t y, std::size_t x) const { return v[y * width + x]; }
};

template <typename T>
std::vector<Plane> planes_of(const Tensor<T>& t) {
  require_rank4(t, "ssim");
  std::vector<Plane> out;
  const std::size_t h = t.dim(2), w = t.dim(3);
  for (std::size_t n = 0; n < t.dim(0); ++n) {
    for (std::size_t c = 0; c < t.dim(1); ++c) {
      Plane p{h, w, std::vector<double>(h * w)};
      for (std::size_t k = 0; k < h * w; ++k) p.v[k] = static_cast<double>(t.data()[(n * t.dim(1) + c) * h * w + k]);
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double center = (static_cast<double>(size) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = static_cast<double>(i) - center;
    k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering.
inline Plane filter_valid(const Plane& p, const std::vector<double>& k) {
  const std::size_t n = k.size();
  Plane rows{p.height, p.width - n + 1, {}};
  rows.v.assign(rows.height * rows.width, 0.0);
  for (std::size_t y = 0; y < rows.height; ++y)
    for (std::size_t x = 0; x < rows.width; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * p(y, x + i);
      rows.v[y * rows.width + x] = s;
    }
  Plane out{p.height - n + 1, rows.width, {}};
  out.v.assign(out.height * out.width, 0.0);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * rows(y + i, x);
      out.v[y * out.width + x] = s;
    }
  return out;
}

struct SsimTerms {
  double ssim = 0.0;  // mean of the full SSIM map
  double cs = 0.0;    // mean of the contrast-structure map
};

// The expression is symmetric in (a, b) term by term, so swapping the
// arguments reproduces the result bit for bit.
inline SsimTerms ssim_terms(const Plane& a, const Plane& b, const SsimOptions& o) {
  const auto k = gaussian_kernel(o.window, o.sigma);
  Plane aa = a, bb = b, ab = a;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const Plane mu_a = filter_valid(a, k), mu_b = filter_valid(b, k);
  const Plane s_aa = filter_valid(aa, k), s_bb = filter_valid(bb, k), s_ab = filter_valid(ab, k);
  const double c1 = (o.k1 * o.peak) * (o.k1 * o.peak), c2 = (o.k2 * o.peak) * (o.k2 * o.peak);
  SsimTerms terms;
  const std::size_t count = mu_a.v.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double var_sum = (s_aa.v[i] - ma * ma) + (s_bb.v[i] - mb * mb);
    const double cov = s_ab.v[i] - ma * mb;
    const double cs = (2.0 * cov + c2) / (var_sum + c2);
    const double lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    terms.ssim += lum * cs;
    terms.cs += cs;
  }
  terms.ssim /= static_cast<double>(count);
  terms.cs /= static_cast<double>(count);
  return terms;
}

// 2 x 2 mean pooling; an odd trailing row or column is dropped.
inline Plane downsample(const Plane& p) {
  Plane out{p.height / 2, p.width / 2, {}};
  out.v.resize(out.height * out.width);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x)
      out.v[y * out.width + x] =
          0.25 * (p(2 * y, 2 * x) + p(2 * y, 2 * x + 1) + p(2 * y + 1, 2 * x) + p(2 * y + 1, 2 * x + 1));
  return out;
}

}  // namespace detail

/// Mean SSIM over valid windows, per channel, averaged over channels (and
/// batch elements).
template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b, const SsimOptions& options = {}) {
  require_same_shape(a, b, "ssim");
  require_rank4(a, "ssim");
  if (a.dim(2) < options.window || a.dim(3) < options.window) {
    throw ShapeError("ssim: image " + to_string(a.shape()) + " smaller than the " + std::to_string(options.window) +
                     "-pixel window");
  }
  const auto pa = detail::planes_of(a), pb = detail::planes_of(b);
  double total = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) total += detail::ssim_terms(pa[i], pb[i], options).ssim;
  return total / static_cast<double>(pa.size());
}

/// Number of MS-SSIM scales usable for the given extent: at most `scales`,
/// with the coarsest level still covering one window.
inline std::size_t ms_ssim_scale_count(std::size_t min_extent, std::size_t scales = 5, std::size_t window = 11) {
  std::size_t count = 0;
  while (count < scales && (min_extent >> count) >= window) ++count;
  return count;
}

/// Multi-scale SSIM: contrast-structure means at the finer scales, full SSIM
/// at the coarsest, combined by a weighted geometric mean (negative terms
/// clipped to 0). Images too small for all scales use fewer, with the leading
/// weights renormalized to sum to one. Averaged over channels.
template <typename T>
double ms_ssim(const Tensor<T>& a, const Tensor<T>& b, std::size_t scales = 5, const SsimOptions& options = {}) {
  require_same_shape(a, b, "ms_ssim");
  require_rank4(a, "ms_ssim");
  if (scales < 1 || scales > kMsSsimWeights.size()) throw Error("ms_ssim: scales must be in [1, 5]");
  const std::size_t used = ms_ssim_scale_count(std::min(a.dim(2), a.dim(3)), scales, options.window);
  if (used == 0) throw ShapeError("ms_ssim: image " + to_string(a.shape()) + " too small for one scale");
  double weight_sum = 0.0;
  for (std::size_t s = 0; s < used; ++s) weight_sum += kMsSsimWeights[s];

  auto pa = detail::planes_of(a), pb = detail::planes_of(b);
  double total = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    detail::Plane x = pa[i], y = pb[i];
    double value = 1.0;
    for (std::size_t s = 0; s < used; ++s) {
      const detail::SsimTerms terms = detail::ssim_terms(x, y, options);
      const double base = std::max(0.0, s + 1 == used ? terms.ssim : terms.cs);
      value *= std::pow(base, kMsSsimWeights[s] / weight_sum);
      if (s + 1 < used) {
        x = detail::downsample(x);
        y = detail::downsample(y);
      }
    }
    total += value;
  }
  return total / static_cast<double>(pa.size());
}

struct RdPoint {
  std::size_t iteration = 0;
  double bpp = 0.0;
  double psnr_db = 0.0;
  double ms_ssim = 0.0;
};

/// One rate-distortion point per iteration count t = 1..max_iterations. The
/// image (1 x 3 x H x W in [0, 1], any size) is padded for coding and every
/// metric is computed on the cropped reconstruction.
template <typename T>
std::vector<RdPoint> rd_points(const CodecModel<T>& model, const Tensor<T>& image, std::size_t max_iterations,
                               ReconstructionMode mode) {
  const PaddedTensor<T> padded = pad_to_multiple(image, ArchitectureConfig::kDownsampling);
  const IterationTrace<T> trace = compress(model, padded.tensor, max_iterations, mode);
  BitstreamHeader header;
  header.width = static_cast<std::uint32_t>(padded.width);
  header.height = static_cast<std::uint32_t>(padded.height);
  header.padded_width = static_cast<std::uint32_t>(padded.tensor.dim(3));
  header.padded_height = static_cast<std::uint32_t>(padded.tensor.dim(2));
  header.code_channels = static_cast<std::uint16_t>(model.config.code_channels);

  std::vector<RdPoint> points;
  for (std::size_t t = 1; t <= max_iterations; ++t) {
    header.iterations = static_cast<std::uint16_t>(t);
    const Tensor<T> recon = crop(trace.reconstructions[t], padded.height, padded.width);
    points.push_back({t, bits_per_pixel(header), psnr(image, recon), ms_ssim(image, recon)});
  }
  return points;
}

}  // namespace grnc
