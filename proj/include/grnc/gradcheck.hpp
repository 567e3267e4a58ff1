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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grnc/layers.hpp"
#include "grnc/random.hpp"
#include "grnc/tensor.hpp"
#include "grnc/training.hpp"

namespace grnc {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  std::size_t seeds = 20;
  double tolerance = 1e-5;
  double eps = 1e-5;
  /// Name of an op whose analytic gradient is deliberately corrupted, to
  /// prove the harness catches faults. Empty for a normal run.
  std::string fault;
};

struct GradcheckReport {
  std::string op;
  double max_error = 0.0;
  std::size_t seeds = 0;
  bool passed = false;
};

namespace detail {

using D = double;

inline Tensor<D> random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor<D> t(std::move(shape));
  for (D& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + uniform_index(rng, hi - lo + 1); }

inline D dot(const Tensor<D>& a, const Tensor<D>& b) {
  D s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Compares `analytic` with central differences of `loss` w.r.t. `target`,
// which `loss` reads by reference.
class GradientComparer {
 public:
  GradientComparer(const GradcheckOptions& options, bool inject_fault) : options_(options), fault_(inject_fault) {}

  void compare(Tensor<D>& target, Tensor<D> analytic, const std::function<D()>& loss) {
    if (fault_ && !injected_) {
      analytic[0] += 1e-2;
      injected_ = true;
    }
    const Tensor<D> numeric = finite_difference_grad(
        [&](const Tensor<D>& probe) {
          Tensor<D> saved = std::move(target);
          target = probe;
          const D l = loss();
          target = std::move(saved);
          return l;
        },
        target, options_.eps);
    worst_ = std::max(worst_, max_relative_error(analytic, numeric));
  }

  double worst() const { return worst_; }

 private:
  const GradcheckOptions& options_;
  bool fault_;
  bool injected_ = false;
  double worst_ = 0.0;
};

inline ConvParams<D> random_conv(Rng& rng, std::size_t out, std::size_t in, std::size_t k, std::size_t stride,
                                 std::size_t pad) {
  return {random_tensor(rng, {out, in, k, k}), random_tensor(rng, {out}), stride, pad};
}

inline void check_conv(Rng& rng, GradientComparer& cmp) {
  const std::size_t k = pick(rng, 1, 3), pad = pick(rng, 0, 1), stride = pick(rng, 1, 2);
  const std::size_t h = pick(rng, std::max<std::size_t>(k, 2), 4), w = pick(rng, std::max<std::size_t>(k, 2), 4);
  ConvParams<D> p = random_conv(rng, pick(rng, 1, 3), pick(rng, 1, 3), k, stride, pad);
  Tensor<D> x = random_tensor(rng, {pick(rng, 1, 2), p.in_channels(), h, w});
  const Tensor<D> proj = random_tensor(rng, conv2d_forward(x, p).shape());
  auto loss = [&] { return dot(conv2d_forward(x, p), proj); };
  const ConvGrads<D> g = conv2d_backward(proj, x, p);
  cmp.compare(x, g.input, loss);
  cmp.compare(p.weight, g.weight, loss);
  cmp.compare(p.bias, g.bias, loss);
}

inline void check_gdn(Rng& rng, GradientComparer& cmp, bool inverse) {
  const std::size_t c = pick(rng, 1, 3);
  GdnParams<D> p{random_tensor(rng, {c}, 0.5, 1.5), random_tensor(rng, {c, c}, 0.0, 0.5)};
  Tensor<D> x = random_tensor(rng, {pick(rng, 1, 2), c, pick(rng, 1, 4), pick(rng, 1, 4)}, -2.0, 2.0);
  const Tensor<D> proj = random_tensor(rng, x.shape());
  auto loss = [&] { return dot(inverse ? igdn_forward(x, p) : gdn_forward(x, p), proj); };
  const GdnGrads<D> g = inverse ? igdn_backward(proj, x, p) : gdn_backward(proj, x, p);
  cmp.compare(x, g.input, loss);
  cmp.compare(p.beta, g.beta, loss);
  cmp.compare(p.gamma, g.gamma, loss);
}

inline LstmParams<D> random_lstm(Rng& rng, std::size_t in, std::size_t hidden, std::size_t stride) {
  return {random_conv(rng, 4 * hidden, in, 3, stride, 1), random_conv(rng, 4 * hidden, hidden, 1, 1, 0)};
}

inline void check_lstm(Rng& rng, GradientComparer& cmp, std::size_t steps) {
  const std::size_t in = pick(rng, 1, 3), hidden = pick(rng, 1, 3), stride = pick(rng, 1, 2);
  LstmParams<D> p = random_lstm(rng, in, hidden, stride);
  const std::size_t batch = pick(rng, 1, 2);
  std::vector<Tensor<D>> xs;
  for (std::size_t s = 0; s < steps; ++s) xs.push_back(random_tensor(rng, {batch, in, 4, 4}));
  const Shape state_shape = conv_lstm_state_shape(xs[0].shape(), p);
  LstmState<D> init{random_tensor(rng, state_shape), random_tensor(rng, state_shape)};
  std::vector<Tensor<D>> proj_h;
  for (std::size_t s = 0; s < steps; ++s) proj_h.push_back(random_tensor(rng, state_shape));
  const Tensor<D> proj_c = random_tensor(rng, state_shape);

  // Loss touches every output h_s and the final memory c.
  auto loss = [&] {
    LstmState<D> state = init;
    D l = 0;
    for (std::size_t s = 0; s < steps; ++s) {
      state = conv_lstm_step(xs[s], state, p);
      l += dot(state.h, proj_h[s]);
    }
    return l + dot(state.c, proj_c);
  };

  std::vector<LstmCache<D>> caches(steps);
  LstmState<D> state = init;
  for (std::size_t s = 0; s < steps; ++s) state = conv_lstm_step(xs[s], state, p, &caches[s]);

  LstmState<D> grad_next{Tensor<D>(state_shape), proj_c};
  std::vector<Tensor<D>> grad_x(steps);
  LstmParams<D> grad_p{ConvParams<D>::zeros(4 * hidden, in, 3, stride, 1),
                       ConvParams<D>::zeros(4 * hidden, hidden, 1, 1, 0)};
  for (std::size_t s = steps; s-- > 0;) {
    LstmGrads<D> g = conv_lstm_backward(proj_h[s], grad_next, caches[s], p);
    accumulate(grad_p.input_conv.weight, g.input_conv.weight);
    accumulate(grad_p.input_conv.bias, g.input_conv.bias);
    accumulate(grad_p.hidden_conv.weight, g.hidden_conv.weight);
    accumulate(grad_p.hidden_conv.bias, g.hidden_conv.bias);
    grad_x[s] = std::move(g.input);
    grad_next = std::move(g.prev_state);
  }
  for (std::size_t s = 0; s < steps; ++s) cmp.compare(xs[s], grad_x[s], loss);
  cmp.compare(init.h, grad_next.h, loss);
  cmp.compare(init.c, grad_next.c, loss);
  cmp.compare(p.input_conv.weight, grad_p.input_conv.weight, loss);
  cmp.compare(p.input_conv.bias, grad_p.input_conv.bias, loss);
  cmp.compare(p.hidden_conv.weight, grad_p.hidden_conv.weight, loss);
  cmp.compare(p.hidden_conv.bias, grad_p.hidden_conv.bias, loss);
}

inline void check_l1_loss(Rng& rng, GradientComparer& cmp) {
  const Shape shape{pick(rng, 1, 2), 3, pick(rng, 1, 4), pick(rng, 1, 4)};
  std::vector<Tensor<D>> residuals{random_tensor(rng, shape), random_tensor(rng, shape)};
  const double beta = uniform(rng, 0.5, 2.0);
  const auto norm = pick(rng, 0, 1) ? LossNormalization::kMean : LossNormalization::kSum;
  auto loss = [&] { return l1_residual_loss(std::span<const Tensor<D>>(residuals), beta, norm); };
  const auto grads = l1_residual_loss_grad(std::span<const Tensor<D>>(residuals), beta, norm);
  for (std::size_t t = 0; t < residuals.size(); ++t) cmp.compare(residuals[t], grads[t], loss);
}

}  // namespace detail

inline const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> ops{"conv2d_backward",    "gdn_backward",         "igdn_backward",
                                            "conv_lstm_backward", "conv_lstm_bptt_2step", "l1_residual_loss"};
  return ops;
}

/// Compares every hand-written backward pass against central differences at
/// 64-bit precision, one report per op over `options.seeds` random instances.
inline std::vector<GradcheckReport> run_gradient_checks(const GradcheckOptions& options = {}) {
  std::vector<GradcheckReport> reports;
  for (const std::string& op : gradcheck_ops()) {
    GradcheckReport report{op, 0.0, options.seeds, false};
    for (std::size_t s = 0; s < options.seeds; ++s) {
      Rng rng(options.seed * 1000003u + s);
      detail::GradientComparer cmp(options, options.fault == op);
      if (op == "conv2d_backward") detail::check_conv(rng, cmp);
      if (op == "gdn_backward") detail::check_gdn(rng, cmp, false);
      if (op == "igdn_backward") detail::check_gdn(rng, cmp, true);
      if (op == "conv_lstm_backward") detail::check_lstm(rng, cmp, 1);
      if (op == "conv_lstm_bptt_2step") detail::check_lstm(rng, cmp, 2);
      if (op == "l1_residual_loss") detail::check_l1_loss(rng, cmp);
      report.max_error = std::max(report.max_error, cmp.worst());
    }
    report.passed = report.max_error < options.tolerance;
    reports.push_back(report);
  }
  return reports;
}

}  // namespace grnc
