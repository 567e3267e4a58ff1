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

#include "grnc/tensor.hpp"

namespace grnc {

// Channel c * block^2 + i * block + j of the input lands at spatial offset
// (i, j) of output channel c.

template <typename T>
Tensor<T> depth_to_space(const Tensor<T>& input, std::size_t block) {
  require_rank4(input, "depth_to_space");
  const std::size_t b2 = block * block;
  if (block < 1 || input.dim(1) % b2 != 0) {
    throw ShapeError("depth_to_space: " + std::to_string(input.dim(1)) + " channels not divisible by block^2 = " +
                     std::to_string(b2));
  }
  const std::size_t n_ = input.dim(0), c_out = input.dim(1) / b2, h_ = input.dim(2), w_ = input.dim(3);
  Tensor<T> out({n_, c_out, h_ * block, w_ * block});
  for (std::size_t n = 0; n < n_; ++n)
    for (std::size_t c = 0; c < c_out; ++c)
      for (std::size_t i = 0; i < block; ++i)
        for (std::size_t j = 0; j < block; ++j)
          for (std::size_t h = 0; h < h_; ++h)
            for (std::size_t w = 0; w < w_; ++w)
              out.at(n, c, h * block + i, w * block + j) = input.at(n, c * b2 + i * block + j, h, w);
  return out;
}

template <typename T>
Tensor<T> space_to_depth(const Tensor<T>& input, std::size_t block) {
  require_rank4(input, "space_to_depth");
  if (block < 1 || input.dim(2) % block != 0 || input.dim(3) % block != 0) {
    throw ShapeError("space_to_depth: spatial extents of " + to_string(input.shape()) + " not divisible by " +
                     std::to_string(block));
  }
  const std::size_t b2 = block * block;
  const std::size_t n_ = input.dim(0), c_in = input.dim(1), h_ = input.dim(2) / block, w_ = input.dim(3) / block;
  Tensor<T> out({n_, c_in * b2, h_, w_});
  for (std::size_t n = 0; n < n_; ++n)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t i = 0; i < block; ++i)
        for (std::size_t j = 0; j < block; ++j)
          for (std::size_t h = 0; h < h_; ++h)
            for (std::size_t w = 0; w < w_; ++w)
              out.at(n, c * b2 + i * block + j, h, w) = input.at(n, c, h * block + i, w * block + j);
  return out;
}

/// The rearrangement is a permutation, so its gradient is the inverse one.
template <typename T>
Tensor<T> depth_to_space_backward(const Tensor<T>& grad_out, std::size_t block) {
  return space_to_depth(grad_out, block);
}

}  // namespace grnc
