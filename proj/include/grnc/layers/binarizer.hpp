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

#include <cmath>
#include <string>

#include "grnc/random.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

enum class BinarizeMode {
  kInferenceSign,    // sign(x), sign(0) = +1
  kTrainStochastic,  // +1 with probability (1 + x) / 2
  kPassThrough,      // no quantization; only for differentiable test harnesses
};

/// Maps pre-codes in [-1, 1] to codes in {-1, +1}.
template <typename T>
Tensor<T> binarize(const Tensor<T>& pre_codes, BinarizeMode mode, Rng* rng = nullptr) {
  if (mode == BinarizeMode::kTrainStochastic && rng == nullptr) {
    throw Error("binarize: stochastic mode requires a generator");
  }
  Tensor<T> out(pre_codes.shape());
  for (std::size_t k = 0; k < pre_codes.size(); ++k) {
    const T x = pre_codes[k];
    if (!(std::abs(x) <= T(1) + T(1e-6))) {
      throw NumericError("binarize: pre-code " + std::to_string(static_cast<double>(x)) + " outside [-1, 1]");
    }
    switch (mode) {
      case BinarizeMode::kInferenceSign:
        out[k] = x >= T(0) ? T(1) : T(-1);
        break;
      case BinarizeMode::kTrainStochastic:
        out[k] = uniform01(*rng) < (1.0 + static_cast<double>(x)) / 2.0 ? T(1) : T(-1);
        break;
      case BinarizeMode::kPassThrough:
        out[k] = x;
        break;
    }
  }
  return out;
}

/// Straight-through estimator.
template <typename T>
Tensor<T> binarize_backward(const Tensor<T>& grad_out) {
  return grad_out;
}

}  // namespace grnc
