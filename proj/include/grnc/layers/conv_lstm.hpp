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

#include "grnc/layers/conv2d.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

/// Convolutional LSTM cell. Both convolutions emit 4 * hidden channels split
/// into equal groups in the order [forget, input, candidate, output].
template <typename T>
struct LstmParams {
  ConvParams<T> input_conv;
  ConvParams<T> hidden_conv;

  std::size_t hidden_channels() const { return input_conv.out_channels() / 4; }

  void validate() const {
    const std::size_t gates = input_conv.out_channels();
    if (gates % 4 != 0 || hidden_conv.out_channels() != gates || hidden_conv.in_channels() != gates / 4 ||
        hidden_conv.stride != 1) {
      throw ShapeError("conv_lstm: inconsistent gate convolutions " + to_string(input_conv.weight.shape()) + " / " +
                       to_string(hidden_conv.weight.shape()));
    }
  }
};

/// Hidden (h) and memory (c) tensors carried between iterations.
template <typename T>
struct LstmState {
  Tensor<T> h;
  Tensor<T> c;

  static LstmState zeros(const Shape& shape) { return {Tensor<T>(shape), Tensor<T>(shape)}; }
  bool empty() const { return h.empty(); }
};

/// Forward activations retained for the backward pass.
template <typename T>
struct LstmCache {
  Tensor<T> x;
  LstmState<T> prev;
  Tensor<T> forget, input, candidate, output;
  Tensor<T> tanh_c;
};

template <typename T>
struct LstmGrads {
  Tensor<T> input;
  LstmState<T> prev_state;
  ConvGrads<T> input_conv;  // .input unused
  ConvGrads<T> hidden_conv;
};

/// Shape of h and c produced for input `x`.
template <typename T>
Shape conv_lstm_state_shape(const Shape& x_shape, const LstmParams<T>& p) {
  return {x_shape.at(0), p.hidden_channels(),
          conv_output_extent(x_shape.at(2), p.input_conv.kernel(), p.input_conv.stride, p.input_conv.padding),
          conv_output_extent(x_shape.at(3), p.input_conv.kernel(), p.input_conv.stride, p.input_conv.padding)};
}

/// One cell step. The returned state's h is also the cell output. An empty
/// `state` is treated as all zeros.
template <typename T>
LstmState<T> conv_lstm_step(const Tensor<T>& x, const LstmState<T>& state, const LstmParams<T>& p,
                            LstmCache<T>* cache = nullptr) {
  p.validate();
  const Shape state_shape = conv_lstm_state_shape(x.shape(), p);
  const LstmState<T> prev = state.empty() ? LstmState<T>::zeros(state_shape) : state;
  if (prev.h.shape() != state_shape || prev.c.shape() != state_shape) {
    throw ShapeError("conv_lstm_step: state " + to_string(prev.h.shape()) + "/" + to_string(prev.c.shape()) +
                     " does not match expected " + to_string(state_shape));
  }

  Tensor<T> gates = conv2d_forward(x, p.input_conv);
  accumulate(gates, conv2d_forward(prev.h, p.hidden_conv));

  const std::size_t batch = state_shape[0], hidden = state_shape[1];
  const std::size_t plane = state_shape[2] * state_shape[3];
  const std::size_t block = hidden * plane;
  Tensor<T> f(state_shape), i(state_shape), g(state_shape), o(state_shape);
  LstmState<T> next = LstmState<T>::zeros(state_shape);
  Tensor<T> tanh_c(state_shape);
  for (std::size_t n = 0; n < batch; ++n) {
    const T* z = gates.data() + n * 4 * block;
    for (std::size_t k = 0; k < block; ++k) {
      const std::size_t idx = n * block + k;
      f[idx] = sigmoid(z[k]);
      i[idx] = sigmoid(z[block + k]);
      g[idx] = std::tanh(z[2 * block + k]);
      o[idx] = sigmoid(z[3 * block + k]);
      next.c[idx] = f[idx] * prev.c[idx] + i[idx] * g[idx];
      tanh_c[idx] = std::tanh(next.c[idx]);
      next.h[idx] = o[idx] * tanh_c[idx];
    }
  }
  if (cache) *cache = {x, prev, std::move(f), std::move(i), std::move(g), std::move(o), std::move(tanh_c)};
  return next;
}

/// Backward through one step. `grad_h` is the gradient arriving at the cell
/// output; `grad_next` holds the gradients arriving at (h, c) from the
/// following step and may be empty.
template <typename T>
LstmGrads<T> conv_lstm_backward(const Tensor<T>& grad_h, const LstmState<T>& grad_next, const LstmCache<T>& cache,
                                const LstmParams<T>& p) {
  const Shape& shape = cache.forget.shape();
  if (grad_h.shape() != shape) {
    throw ShapeError("conv_lstm_backward: grad_h " + to_string(grad_h.shape()) + " vs state " + to_string(shape));
  }
  if (!grad_next.empty() && (grad_next.h.shape() != shape || grad_next.c.shape() != shape)) {
    throw ShapeError("conv_lstm_backward: next-state gradient shape mismatch");
  }

  const std::size_t batch = shape[0], hidden = shape[1], plane = shape[2] * shape[3];
  const std::size_t block = hidden * plane;
  Tensor<T> dgates({batch, 4 * hidden, shape[2], shape[3]});
  LstmGrads<T> grads;
  grads.prev_state = LstmState<T>::zeros(shape);
  for (std::size_t n = 0; n < batch; ++n) {
    T* dz = dgates.data() + n * 4 * block;
    for (std::size_t k = 0; k < block; ++k) {
      const std::size_t idx = n * block + k;
      const T dh = grad_h[idx] + (grad_next.empty() ? T(0) : grad_next.h[idx]);
      const T tc = cache.tanh_c[idx];
      const T f = cache.forget[idx], i = cache.input[idx], g = cache.candidate[idx], o = cache.output[idx];
      const T dc = (grad_next.empty() ? T(0) : grad_next.c[idx]) + dh * o * (T(1) - tc * tc);
      grads.prev_state.c[idx] = dc * f;
      dz[k] = dc * cache.prev.c[idx] * f * (T(1) - f);
      dz[block + k] = dc * g * i * (T(1) - i);
      dz[2 * block + k] = dc * i * (T(1) - g * g);
      dz[3 * block + k] = dh * tc * o * (T(1) - o);
    }
  }

  grads.input_conv = conv2d_backward(dgates, cache.x, p.input_conv);
  grads.hidden_conv = conv2d_backward(dgates, cache.prev.h, p.hidden_conv);
  grads.input = std::move(grads.input_conv.input);
  grads.prev_state.h = std::move(grads.hidden_conv.input);
  grads.input_conv.input = Tensor<T>();
  grads.hidden_conv.input = Tensor<T>();
  return grads;
}

}  // namespace grnc
