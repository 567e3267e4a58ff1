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

#include <Eigen/Core>

namespace grnc::linalg {

/// C[m x n] (+)= op(A) * op(B), all row-major. With `trans_a` A is stored
/// k x m, with `trans_b` B is stored n x k.
template <typename T>
void gemm(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool trans_a, bool trans_b,
          bool accumulate) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Idx = Eigen::Index;
  const auto im = static_cast<Idx>(m), in = static_cast<Idx>(n), ik = static_cast<Idx>(k);
  Eigen::Map<const Mat> A(a, trans_a ? ik : im, trans_a ? im : ik);
  Eigen::Map<const Mat> B(b, trans_b ? in : ik, trans_b ? ik : in);
  Eigen::Map<Mat> C(c, im, in);
  if (!accumulate) C.setZero();
  if (trans_a && trans_b) {
    C.noalias() += A.transpose() * B.transpose();
  } else if (trans_a) {
    C.noalias() += A.transpose() * B;
  } else if (trans_b) {
    C.noalias() += A * B.transpose();
  } else {
    C.noalias() += A * B;
  }
}

}  // namespace grnc::linalg
