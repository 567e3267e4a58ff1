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
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "grnc/error.hpp"

namespace grnc {

using Shape = std::vector<std::size_t>;

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

/// Dense row-major array. 4-D tensors use batch x channels x height x width.
/// A default-constructed tensor is empty and holds no shape.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    validate_shape();
    data_.assign(shape_size(shape_), fill);
  }

  Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
    validate_shape();
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("tensor shape " + grnc::to_string(shape_) + " needs " +
                       std::to_string(shape_size(shape_)) + " values, got " +
                       std::to_string(data_.size()));
    }
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  Tensor reshaped(Shape shape) const {
    if (shape_size(shape) != size()) {
      throw ShapeError("cannot reshape " + grnc::to_string(shape_) + " to " + grnc::to_string(shape));
    }
    return Tensor(std::move(shape), data_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor& other) const = default;

 private:
  void validate_shape() const {
    for (std::size_t extent : shape_) {
      if (extent == 0) throw ShapeError("tensor extents must be >= 1, got " + grnc::to_string(shape_));
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

template <typename T>
void require_rank4(const Tensor<T>& t, const char* what) {
  if (t.rank() != 4) {
    throw ShapeError(std::string(what) + ": expected a 4-D tensor, got " + to_string(t.shape()));
  }
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](T v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Elementwise primitives

enum class ElementwiseOp { kAdd, kSub, kMul, kTanh, kSigmoid };

template <typename T>
T sigmoid(T x) {
  // Split on sign so exp never overflows.
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T, typename F>
Tensor<T> map(const Tensor<T>& a, F&& f) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename T, typename F>
Tensor<T> zip(const Tensor<T>& a, const Tensor<T>& b, const char* what, F&& f) {
  require_same_shape(a, b, what);
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return zip(a, b, "add", [](T x, T y) { return x + y; });
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return zip(a, b, "sub", [](T x, T y) { return x - y; });
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return zip(a, b, "mul", [](T x, T y) { return x * y; });
}
template <typename T>
Tensor<T> add(const Tensor<T>& a, T s) {
  return map(a, [s](T x) { return x + s; });
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, T s) {
  return map(a, [s](T x) { return x * s; });
}
template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  return map(a, [](T x) { return std::tanh(x); });
}
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return map(a, [](T x) { return sigmoid(x); });
}
template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  return map(a, [lo, hi](T x) { return std::clamp(x, lo, hi); });
}

template <typename T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, const Tensor<T>* b = nullptr) {
  const bool binary = op == ElementwiseOp::kAdd || op == ElementwiseOp::kSub || op == ElementwiseOp::kMul;
  if (binary && b == nullptr) throw Error("elementwise: binary op needs a second operand");
  switch (op) {
    case ElementwiseOp::kAdd: return add(a, *b);
    case ElementwiseOp::kSub: return sub(a, *b);
    case ElementwiseOp::kMul: return mul(a, *b);
    case ElementwiseOp::kTanh: return tanh(a);
    case ElementwiseOp::kSigmoid: return sigmoid(a);
  }
  throw Error("elementwise: unknown op");
}

// In-place accumulate, used by backward passes that sum gradient contributions.
template <typename T>
void accumulate(Tensor<T>& into, const Tensor<T>& from) {
  require_same_shape(into, from, "accumulate");
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

// ---------------------------------------------------------------------------
// Reductions

template <typename T>
T reduce_sum(const Tensor<T>& a) {
  T total = T(0);
  for (T v : a.values()) total += v;
  return total;
}

/// Sums over `axes`. Reduced extents are dropped unless `keep_dims`; a full
/// reduction without `keep_dims` yields a one-element tensor of shape [1].
template <typename T>
Tensor<T> reduce_sum(const Tensor<T>& a, const std::set<std::size_t>& axes, bool keep_dims = false) {
  for (std::size_t axis : axes) {
    if (axis >= a.rank()) {
      throw ShapeError("reduce_sum: axis " + std::to_string(axis) + " invalid for shape " + to_string(a.shape()));
    }
  }
  Shape kept(a.rank());
  for (std::size_t d = 0; d < a.rank(); ++d) kept[d] = axes.count(d) ? 1 : a.dim(d);
  Tensor<T> out(kept);

  std::vector<std::size_t> index(a.rank(), 0);
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    std::size_t target = 0;
    for (std::size_t d = 0; d < a.rank(); ++d) target = target * kept[d] + (axes.count(d) ? 0 : index[d]);
    out[target] += a[flat];
    for (std::size_t d = a.rank(); d-- > 0;) {
      if (++index[d] < a.dim(d)) break;
      index[d] = 0;
    }
  }
  if (keep_dims) return out;
  Shape squeezed;
  for (std::size_t d = 0; d < a.rank(); ++d) {
    if (!axes.count(d)) squeezed.push_back(a.dim(d));
  }
  if (squeezed.empty()) squeezed.push_back(1);
  return out.reshaped(squeezed);
}

// ---------------------------------------------------------------------------
// Gradient oracle

/// Central-difference gradient of a scalar function. Used as the independent
/// reference for every hand-written backward pass.
template <typename T, typename F>
Tensor<T> finite_difference_grad(F&& f, const Tensor<T>& x, T eps = T(1e-5)) {
  if (!(eps > T(0))) throw Error("finite_difference_grad: eps must be positive");
  Tensor<T> probe = x;
  Tensor<T> grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T saved = probe[i];
    probe[i] = saved + eps;
    const T plus = f(static_cast<const Tensor<T>&>(probe));
    probe[i] = saved - eps;
    const T minus = f(static_cast<const Tensor<T>&>(probe));
    probe[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("finite_difference_grad: non-finite function value at element " + std::to_string(i));
    }
    grad[i] = (plus - minus) / (T(2) * eps);
  }
  return grad;
}

/// |a - b| / max(1, |a|, |b|), the error measure used by gradient checks.
template <typename T>
T relative_error(T a, T b) {
  return std::abs(a - b) / std::max({T(1), std::abs(a), std::abs(b)});
}

template <typename T>
T max_relative_error(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "max_relative_error");
  T worst = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a[i], b[i]));
  return worst;
}

}  // namespace grnc
