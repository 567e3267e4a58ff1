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
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "grnc/linalg.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

inline constexpr double kGdnBetaFloor = 1e-6;

/// Parameters of a (possibly inverse) generalized divisive normalization:
/// beta has one entry per channel, gamma is channels x channels.
/// Invariants: beta >= kGdnBetaFloor, gamma >= 0, maintained by project().
template <typename T>
struct GdnParams {
  Tensor<T> beta;
  Tensor<T> gamma;

  std::size_t channels() const { return beta.size(); }

  static GdnParams identity_init(std::size_t channels, T gamma_diag = T(0.1)) {
    GdnParams p{Tensor<T>({channels}, T(1)), Tensor<T>({channels, channels})};
    for (std::size_t i = 0; i < channels; ++i) p.gamma[i * channels + i] = gamma_diag;
    return p;
  }

  void project() {
    for (T& b : beta.values()) b = std::max(b, T(kGdnBetaFloor));
    for (T& g : gamma.values()) g = std::max(g, T(0));
  }
};

template <typename T>
struct GdnGrads {
  Tensor<T> input;
  Tensor<T> beta;
  Tensor<T> gamma;
};

namespace detail {

template <typename T>
void check_gdn(const Tensor<T>& x, const GdnParams<T>& p, const char* what) {
  require_rank4(x, what);
  const std::size_t c = x.dim(1);
  if (p.beta.shape() != Shape{c} || p.gamma.shape() != Shape{c, c}) {
    throw ShapeError(std::string(what) + ": parameters " + to_string(p.beta.shape()) + "/" +
                     to_string(p.gamma.shape()) + " do not match " + std::to_string(c) + " channels");
  }
  if (!all_finite(x)) throw NumericError(std::string(what) + ": non-finite input");
}

// norm[i, m] = sqrt(beta_i + sum_j gamma_ij x_j[m]^2) for one batch element.
template <typename T>
std::vector<T> gdn_norm(const T* x, std::size_t channels, std::size_t plane, const GdnParams<T>& p) {
  std::vector<T> sq(channels * plane);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = x[i] * x[i];
  std::vector<T> norm(channels * plane);
  linalg::gemm(p.gamma.data(), sq.data(), norm.data(), channels, plane, channels, false, false, false);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t m = 0; m < plane; ++m) norm[c * plane + m] = std::sqrt(norm[c * plane + m] + p.beta[c]);
  }
  return norm;
}

template <typename T>
Tensor<T> gdn_apply(const Tensor<T>& x, const GdnParams<T>& p, bool inverse) {
  const std::size_t channels = x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor<T> out(x.shape());
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    const T* src = x.data() + n * channels * plane;
    T* dst = out.data() + n * channels * plane;
    const std::vector<T> norm = gdn_norm(src, channels, plane, p);
    for (std::size_t i = 0; i < channels * plane; ++i) dst[i] = inverse ? src[i] * norm[i] : src[i] / norm[i];
  }
  return out;
}

// Both directions share the structure grad_x = g * d + 2 x * (gamma^T a),
// grad_beta = sum a, grad_gamma = a (x^2)^T, with
//   forward: d = 1/s, a = -g x / (2 s^3);   inverse: d = s, a = g x / (2 s).
template <typename T>
GdnGrads<T> gdn_gradients(const Tensor<T>& grad_out, const Tensor<T>& x, const GdnParams<T>& p, bool inverse) {
  require_same_shape(grad_out, x, inverse ? "igdn_backward" : "gdn_backward");
  const std::size_t channels = x.dim(1), plane = x.dim(2) * x.dim(3);
  GdnGrads<T> grads{Tensor<T>(x.shape()), Tensor<T>(p.beta.shape()), Tensor<T>(p.gamma.shape())};
  std::vector<T> a(channels * plane), sq(channels * plane), back(channels * plane);
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    const T* xs = x.data() + n * channels * plane;
    const T* gs = grad_out.data() + n * channels * plane;
    T* gx = grads.input.data() + n * channels * plane;
    const std::vector<T> s = gdn_norm(xs, channels, plane, p);
    for (std::size_t i = 0; i < channels * plane; ++i) {
      sq[i] = xs[i] * xs[i];
      a[i] = inverse ? gs[i] * xs[i] / (T(2) * s[i]) : -gs[i] * xs[i] / (T(2) * s[i] * s[i] * s[i]);
    }
    for (std::size_t c = 0; c < channels; ++c) {
      T sum = T(0);
      for (std::size_t m = 0; m < plane; ++m) sum += a[c * plane + m];
      grads.beta[c] += sum;
    }
    linalg::gemm(a.data(), sq.data(), grads.gamma.data(), channels, channels, plane, false, true, true);
    linalg::gemm(p.gamma.data(), a.data(), back.data(), channels, plane, channels, true, false, false);
    for (std::size_t i = 0; i < channels * plane; ++i) {
      gx[i] = (inverse ? gs[i] * s[i] : gs[i] / s[i]) + T(2) * xs[i] * back[i];
    }
  }
  return grads;
}

}  // namespace detail

/// u_i = w_i / sqrt(beta_i + sum_j gamma_ij w_j^2) at every location.
template <typename T>
Tensor<T> gdn_forward(const Tensor<T>& w, const GdnParams<T>& p) {
  detail::check_gdn(w, p, "gdn_forward");
  return detail::gdn_apply(w, p, false);
}

template <typename T>
GdnGrads<T> gdn_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_w, const GdnParams<T>& p) {
  detail::check_gdn(saved_w, p, "gdn_backward");
  return detail::gdn_gradients(grad_out, saved_w, p, false);
}

/// w_i = u_i * sqrt(beta_i + sum_j gamma_ij u_j^2). Not the pointwise inverse
/// of gdn_forward under the same parameters.
template <typename T>
Tensor<T> igdn_forward(const Tensor<T>& u_hat, const GdnParams<T>& p) {
  detail::check_gdn(u_hat, p, "igdn_forward");
  return detail::gdn_apply(u_hat, p, true);
}

template <typename T>
GdnGrads<T> igdn_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_u_hat, const GdnParams<T>& p) {
  detail::check_gdn(saved_u_hat, p, "igdn_backward");
  return detail::gdn_gradients(grad_out, saved_u_hat, p, true);
}

}  // namespace grnc
