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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grnc/codec.hpp"
#include "grnc/model.hpp"
#include "grnc/random.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

enum class LossNormalization { kSum, kMean };

struct TrainConfig {
  double learning_rate = 0.0005;
  std::size_t batch_size = 16;
  std::size_t patch_size = 32;
  std::size_t epochs = 10;
  std::size_t steps_per_epoch = 100;
  std::size_t steps = 0;  // overrides epochs * steps_per_epoch when non-zero
  std::size_t iterations = 8;
  double loss_weight = 1.0;
  LossNormalization normalization = LossNormalization::kMean;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool stochastic_binarizer = true;

  std::size_t total_steps() const { return steps != 0 ? steps : epochs * steps_per_epoch; }

  void validate() const {
    if (!(learning_rate > 0) || !(loss_weight > 0) || !(adam_epsilon > 0)) {
      throw Error("train config: learning_rate, loss_weight and adam_eps must be positive");
    }
    if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) {
      throw Error("train config: Adam betas must lie in [0, 1)");
    }
    if (batch_size == 0 || iterations == 0 || total_steps() == 0) {
      throw Error("train config: batch_size, iterations and step count must be positive");
    }
    if (patch_size == 0 || patch_size % ArchitectureConfig::kDownsampling != 0) {
      throw Error("train config: patch_size must be a positive multiple of 16");
    }
  }
};

// ---------------------------------------------------------------------------
// Objective

/// beta * sum_t sum |r_t| over t = 1..T, divided by the total element count
/// in mean mode.
template <typename T>
double l1_residual_loss(std::span<const Tensor<T>> residuals, double beta, LossNormalization normalization) {
  if (residuals.empty()) throw Error("l1_residual_loss: empty trace");
  double total = 0.0;
  std::size_t count = 0;
  for (const Tensor<T>& r : residuals) {
    for (T v : r.values()) total += std::abs(static_cast<double>(v));
    count += r.size();
  }
  return beta * (normalization == LossNormalization::kMean ? total / static_cast<double>(count) : total);
}

template <typename T>
double l1_residual_loss(const IterationTrace<T>& trace, double beta, LossNormalization normalization) {
  if (trace.iterations() == 0) throw Error("l1_residual_loss: empty trace");
  return l1_residual_loss(std::span<const Tensor<T>>(trace.residuals).subspan(1), beta, normalization);
}

/// d loss / d r for each residual tensor (sign(0) taken as 0).
template <typename T>
std::vector<Tensor<T>> l1_residual_loss_grad(std::span<const Tensor<T>> residuals, double beta,
                                             LossNormalization normalization) {
  if (residuals.empty()) throw Error("l1_residual_loss: empty trace");
  std::size_t count = 0;
  for (const Tensor<T>& r : residuals) count += r.size();
  const T scale = static_cast<T>(normalization == LossNormalization::kMean ? beta / static_cast<double>(count) : beta);
  std::vector<Tensor<T>> grads;
  for (const Tensor<T>& r : residuals) {
    grads.push_back(map(r, [scale](T v) { return v > T(0) ? scale : (v < T(0) ? -scale : T(0)); }));
  }
  return grads;
}

template <typename T>
struct LossAndGradients {
  double loss = 0.0;
  CodecModel<T> grads;
  IterationTrace<T> trace;
};

/// Forward unroll, L1 residual loss, and backpropagation through every
/// iteration. The binarizer passes gradients straight through; the clamp
/// passes them only where its input lies inside [0, 1].
template <typename T>
LossAndGradients<T> loss_and_gradients(const CodecModel<T>& model, const Tensor<T>& batch, std::size_t iterations,
                                       BinarizeMode binarize_mode, Rng* rng, double beta,
                                       LossNormalization normalization) {
  const ReconstructionMode mode = model.config.mode;
  UnrollCache<T> cache;
  LossAndGradients<T> out{0.0, zero_model<T>(model.config), {}};
  out.trace = forward_unroll(model, batch, iterations, mode, binarize_mode, rng, &cache);
  const std::span<const Tensor<T>> residuals = std::span<const Tensor<T>>(out.trace.residuals).subspan(1);
  out.loss = l1_residual_loss(residuals, beta, normalization);
  std::vector<Tensor<T>> grad_residual = l1_residual_loss_grad(residuals, beta, normalization);

  EncoderStates<T> enc_grad_states;
  DecoderStates<T> dec_grad_states;
  Tensor<T> grad_from_encoder;  // d loss / d r_t through the encoder input of t + 1
  Tensor<T> grad_carry;         // additive mode: d loss / d x_hat_t through x_hat_{t+1}
  for (std::size_t t = iterations; t >= 1; --t) {
    Tensor<T>& g_r = grad_residual[t - 1];
    if (!grad_from_encoder.empty()) accumulate(g_r, grad_from_encoder);
    Tensor<T> g_pre = mul(g_r, T(-1));
    if (!grad_carry.empty()) accumulate(g_pre, grad_carry);

    const Tensor<T>& decoded = out.trace.decoded[t - 1];
    const Tensor<T>& previous = out.trace.reconstructions[t - 1];
    for (std::size_t k = 0; k < g_pre.size(); ++k) {
      const T pre = mode == ReconstructionMode::kOneShot ? decoded[k] + T(kCenter) : previous[k] + decoded[k];
      if (pre < T(0) || pre > T(1)) g_pre[k] = T(0);
    }
    if (mode == ReconstructionMode::kAdditive) grad_carry = g_pre;

    const Tensor<T> g_codes = decoder_backward(model, cache.decoder[t - 1], g_pre, dec_grad_states, out.grads);
    Tensor<T> g_input = encoder_backward(model, cache.encoder[t - 1], g_codes, enc_grad_states, out.grads);
    grad_from_encoder = t >= 2 ? std::move(g_input) : Tensor<T>();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer

template <typename T>
struct OptimizerState {
  CodecModel<T> first_moment;
  CodecModel<T> second_moment;
  std::uint64_t step = 0;

  static OptimizerState for_model(const CodecModel<T>& model) {
    return {zero_model<T>(model.config), zero_model<T>(model.config), 0};
  }
};

/// Bias-corrected Adam update followed by projection of the GDN parameters
/// onto beta >= 1e-6, gamma >= 0.
template <typename T>
void adam_step(CodecModel<T>& model, const CodecModel<T>& grads, OptimizerState<T>& state, const TrainConfig& config) {
  visit_parameters(
      [](const std::string& name, ParamKind, const Tensor<T>& g) {
        if (!all_finite(g)) throw NumericError("adam_step: non-finite gradient for " + name);
      },
      grads);

  ++state.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  visit_parameters(
      [&](const std::string&, ParamKind, Tensor<T>& param, const Tensor<T>& g, Tensor<T>& m, Tensor<T>& v) {
        for (std::size_t k = 0; k < param.size(); ++k) {
          const double gk = static_cast<double>(g[k]);
          const double mk = b1 * static_cast<double>(m[k]) + (1.0 - b1) * gk;
          const double vk = b2 * static_cast<double>(v[k]) + (1.0 - b2) * gk * gk;
          m[k] = static_cast<T>(mk);
          v[k] = static_cast<T>(vk);
          const double update = config.learning_rate * (mk / correction1) / (std::sqrt(vk / correction2) + config.adam_epsilon);
          param[k] = static_cast<T>(static_cast<double>(param[k]) - update);
        }
      },
      model, grads, state.first_moment, state.second_moment);
  project_gdn(model);
}

/// One optimization step on a batch of patches in [0, 1]. Returns the loss
/// measured before the update.
template <typename T>
double train_step(CodecModel<T>& model, const Tensor<T>& batch, OptimizerState<T>& state, const TrainConfig& config,
                  Rng& rng) {
  const BinarizeMode mode = config.stochastic_binarizer ? BinarizeMode::kTrainStochastic : BinarizeMode::kInferenceSign;
  LossAndGradients<T> lg =
      loss_and_gradients(model, batch, config.iterations, mode, &rng, config.loss_weight, config.normalization);
  if (!std::isfinite(lg.loss)) throw NumericError("train_step: non-finite loss");
  adam_step(model, lg.grads, state, config);
  return lg.loss;
}

/// Loss of the deterministic (sign) codec on a batch; no update.
template <typename T>
double evaluate_loss(const CodecModel<T>& model, const Tensor<T>& batch, std::size_t iterations, double beta = 1.0,
                     LossNormalization normalization = LossNormalization::kMean) {
  return l1_residual_loss(compress(model, batch, iterations, model.config.mode), beta, normalization);
}

// ---------------------------------------------------------------------------
// Data pipeline

struct PatchOrigin {
  std::size_t image = 0;
  std::size_t y = 0;
  std::size_t x = 0;
};

/// `count` patches with uniformly random sources and top-left corners.
/// Every image must be 1 x 3 x H x W with H, W >= patch_size.
template <typename T>
Tensor<T> sample_patches(std::span<const Tensor<T>> images, std::size_t count, std::size_t patch_size, Rng& rng,
                         std::vector<PatchOrigin>* origins = nullptr) {
  if (images.empty()) throw Error("sample_patches: no images");
  for (const Tensor<T>& img : images) {
    if (img.rank() != 4 || img.dim(0) != 1 || img.dim(1) != 3) {
      throw ShapeError("sample_patches: images must be 1 x 3 x H x W, got " + to_string(img.shape()));
    }
    if (img.dim(2) < patch_size || img.dim(3) < patch_size) {
      throw ShapeError("sample_patches: image " + to_string(img.shape()) + " smaller than patch size " +
                       std::to_string(patch_size));
    }
  }
  Tensor<T> batch({count, 3, patch_size, patch_size});
  if (origins) origins->clear();
  for (std::size_t n = 0; n < count; ++n) {
    PatchOrigin o;
    o.image = uniform_index(rng, images.size());
    const Tensor<T>& img = images[o.image];
    o.y = uniform_index(rng, img.dim(2) - patch_size + 1);
    o.x = uniform_index(rng, img.dim(3) - patch_size + 1);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < patch_size; ++y)
        for (std::size_t x = 0; x < patch_size; ++x) batch.at(n, c, y, x) = img.at(0, c, o.y + y, o.x + x);
    if (origins) origins->push_back(o);
  }
  return batch;
}

/// Runs config.total_steps() training steps, each on a freshly sampled batch.
/// `on_step(step, loss)` is called after every step (1-based).
template <typename T>
void train_model(CodecModel<T>& model, std::span<const Tensor<T>> images, const TrainConfig& config,
                 const std::function<void(std::size_t, double)>& on_step = {}) {
  config.validate();
  Rng rng(config.seed);
  OptimizerState<T> state = OptimizerState<T>::for_model(model);
  for (std::size_t step = 1; step <= config.total_steps(); ++step) {
    const Tensor<T> batch = sample_patches(images, config.batch_size, config.patch_size, rng);
    const double loss = train_step(model, batch, state, config, rng);
    if (on_step) on_step(step, loss);
  }
}

}  // namespace grnc
