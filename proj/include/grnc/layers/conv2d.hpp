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

#include <cstddef>
#include <string>
#include <vector>

#include "grnc/linalg.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

/// Filter bank (out x in x K x K) and per-output-channel offsets of an affine
/// convolution. Stride realizes the subsampling between analysis steps.
template <typename T>
struct ConvParams {
  Tensor<T> weight;
  Tensor<T> bias;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t kernel() const { return weight.dim(2); }

  static ConvParams zeros(std::size_t out_ch, std::size_t in_ch, std::size_t kernel, std::size_t stride,
                          std::size_t padding) {
    return {Tensor<T>({out_ch, in_ch, kernel, kernel}), Tensor<T>({out_ch}), stride, padding};
  }
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

inline std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

namespace detail {

struct ConvGeometry {
  std::size_t batch, in_ch, height, width, kernel, stride, padding, out_h, out_w;

  std::size_t rows() const { return in_ch * kernel * kernel; }
  std::size_t cols() const { return batch * out_h * out_w; }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const ConvParams<T>& p) {
  require_rank4(input, "conv2d");
  if (p.weight.rank() != 4 || p.weight.dim(2) != p.weight.dim(3)) {
    throw ShapeError("conv2d: weight must be out x in x K x K, got " + to_string(p.weight.shape()));
  }
  if (p.bias.shape() != Shape{p.out_channels()}) {
    throw ShapeError("conv2d: bias shape " + to_string(p.bias.shape()) + " does not match " +
                     std::to_string(p.out_channels()) + " output channels");
  }
  if (p.stride < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (input.dim(1) != p.in_channels()) {
    throw ShapeError("conv2d: input has " + std::to_string(input.dim(1)) + " channels, weight expects " +
                     std::to_string(p.in_channels()));
  }
  const std::size_t k = p.kernel();
  if (input.dim(2) + 2 * p.padding < k || input.dim(3) + 2 * p.padding < k) {
    throw ShapeError("conv2d: kernel " + std::to_string(k) + " larger than padded input " + to_string(input.shape()));
  }
  return {input.dim(0),
          input.dim(1),
          input.dim(2),
          input.dim(3),
          k,
          p.stride,
          p.padding,
          conv_output_extent(input.dim(2), k, p.stride, p.padding),
          conv_output_extent(input.dim(3), k, p.stride, p.padding)};
}

// Column matrix: row (c, kh, kw), column (n, oh, ow).
template <typename T>
std::vector<T> im2col(const Tensor<T>& input, const ConvGeometry& g) {
  std::vector<T> cols(g.rows() * g.cols(), T(0));
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        T* row = cols.data() + ((c * g.kernel + kh) * g.kernel + kw) * g.cols();
        for (std::size_t n = 0; n < g.batch; ++n) {
          const T* src = input.data() + (n * g.in_ch + c) * g.height * g.width;
          for (std::size_t oh = 0; oh < g.out_h; ++oh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + kh) - static_cast<std::ptrdiff_t>(g.padding);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
            T* dst = row + n * plane + oh * g.out_w;
            for (std::size_t ow = 0; ow < g.out_w; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kw) - static_cast<std::ptrdiff_t>(g.padding);
              if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.width)) dst[ow] = src[ih * g.width + iw];
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
Tensor<T> col2im(const std::vector<T>& cols, const ConvGeometry& g) {
  Tensor<T> out({g.batch, g.in_ch, g.height, g.width});
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        const T* row = cols.data() + ((c * g.kernel + kh) * g.kernel + kw) * g.cols();
        for (std::size_t n = 0; n < g.batch; ++n) {
          T* dst = out.data() + (n * g.in_ch + c) * g.height * g.width;
          for (std::size_t oh = 0; oh < g.out_h; ++oh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + kh) - static_cast<std::ptrdiff_t>(g.padding);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
            const T* src = row + n * plane + oh * g.out_w;
            for (std::size_t ow = 0; ow < g.out_w; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kw) - static_cast<std::ptrdiff_t>(g.padding);
              if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.width)) dst[ih * g.width + iw] += src[ow];
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/// Cross-correlation plus bias. Output extent is
/// floor((H + 2 * padding - K) / stride) + 1 along each spatial axis.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p) {
  const auto g = detail::conv_geometry(input, p);
  const std::vector<T> cols = detail::im2col(input, g);
  const std::size_t out_ch = p.out_channels();
  std::vector<T> product(out_ch * g.cols());
  linalg::gemm(p.weight.data(), cols.data(), product.data(), out_ch, g.cols(), g.rows(), false, false, false);

  Tensor<T> out({g.batch, out_ch, g.out_h, g.out_w});
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < out_ch; ++o) {
      const T* src = product.data() + o * g.cols() + n * plane;
      T* dst = out.data() + (n * out_ch + o) * plane;
      const T b = p.bias[o];
      for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] + b;
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_input, const ConvParams<T>& p) {
  const auto g = detail::conv_geometry(saved_input, p);
  const std::size_t out_ch = p.out_channels();
  const Shape expected{g.batch, out_ch, g.out_h, g.out_w};
  if (grad_out.shape() != expected) {
    throw ShapeError("conv2d_backward: grad_out shape " + to_string(grad_out.shape()) + ", expected " +
                     to_string(expected));
  }

  // Gather grad_out into the (out_ch, n * plane) layout of the forward product.
  const std::size_t plane = g.out_h * g.out_w;
  std::vector<T> gmat(out_ch * g.cols());
  ConvGrads<T> grads{Tensor<T>(), Tensor<T>(p.weight.shape()), Tensor<T>(p.bias.shape())};
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < out_ch; ++o) {
      const T* src = grad_out.data() + (n * out_ch + o) * plane;
      T* dst = gmat.data() + o * g.cols() + n * plane;
      T sum = T(0);
      for (std::size_t i = 0; i < plane; ++i) {
        dst[i] = src[i];
        sum += src[i];
      }
      grads.bias[o] += sum;
    }
  }

  const std::vector<T> cols = detail::im2col(saved_input, g);
  linalg::gemm(gmat.data(), cols.data(), grads.weight.data(), out_ch, g.rows(), g.cols(), false, true, false);

  std::vector<T> dcols(g.rows() * g.cols());
  linalg::gemm(p.weight.data(), gmat.data(), dcols.data(), g.rows(), g.cols(), out_ch, true, false, false);
  grads.input = detail::col2im(dcols, g);
  return grads;
}

}  // namespace grnc
