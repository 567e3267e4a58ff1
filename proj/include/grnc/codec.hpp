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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "grnc/layers.hpp"
#include "grnc/model.hpp"
#include "grnc/random.hpp"
#include "grnc/tensor.hpp"

namespace grnc {

template <typename T>
using EncoderStates = std::array<LstmState<T>, 3>;
template <typename T>
using DecoderStates = std::array<LstmState<T>, 4>;

template <typename T>
struct EncoderCache {
  Tensor<T> input;
  Tensor<T> analysis_out;
  Tensor<T> gdn_out;
  Tensor<T> front_out;
  std::array<LstmCache<T>, 3> cells;
  Tensor<T> binarizer_in;
  Tensor<T> pre_codes;  // tanh output fed to the binarizer
};

template <typename T>
struct DecoderCache {
  Tensor<T> codes;
  Tensor<T> synthesis_out;
  Tensor<T> igdn_out;
  std::array<LstmCache<T>, 4> cells;
  Tensor<T> output_in;
  Tensor<T> output;
};

inline void require_codec_dims(const Shape& shape, std::size_t channels, const char* what) {
  if (shape.size() != 4 || shape[1] != channels || shape[2] % ArchitectureConfig::kDownsampling != 0 ||
      shape[3] % ArchitectureConfig::kDownsampling != 0) {
    throw ShapeError(std::string(what) + ": expected N x " + std::to_string(channels) +
                     " x H x W with H, W divisible by 16, got " + to_string(shape));
  }
}

namespace detail {

template <typename T>
void accumulate_conv(ConvParams<T>& into, const ConvGrads<T>& g) {
  accumulate(into.weight, g.weight);
  accumulate(into.bias, g.bias);
}

template <typename T>
void accumulate_gdn(GdnParams<T>& into, const GdnGrads<T>& g) {
  accumulate(into.beta, g.beta);
  accumulate(into.gamma, g.gamma);
}

template <typename T>
void accumulate_lstm(LstmParams<T>& into, const LstmGrads<T>& g) {
  accumulate_conv(into.input_conv, g.input_conv);
  accumulate_conv(into.hidden_conv, g.hidden_conv);
}

template <typename T>
Tensor<T> tanh_backward(const Tensor<T>& grad_out, const Tensor<T>& tanh_out) {
  return zip(grad_out, tanh_out, "tanh_backward", [](T g, T y) { return g * (T(1) - y * y); });
}

}  // namespace detail

/// One encoder pass: codes in {-1, +1} of shape N x code_channels x H/16 x W/16.
/// `states` is updated in place; empty states start at zero.
template <typename T>
Tensor<T> encode_step(const CodecModel<T>& model, const Tensor<T>& input, EncoderStates<T>& states,
                      BinarizeMode mode = BinarizeMode::kInferenceSign, Rng* rng = nullptr,
                      EncoderCache<T>* cache = nullptr) {
  require_codec_dims(input.shape(), ArchitectureConfig::kInputChannels, "encode_step");
  const auto& enc = model.encoder;
  Tensor<T> analysis_out = conv2d_forward(input, enc.analysis);
  Tensor<T> gdn_out = model.config.use_gdn ? gdn_forward(analysis_out, enc.gdn) : analysis_out;
  Tensor<T> front_out = conv2d_forward(gdn_out, enc.front);

  const Tensor<T>* x = &front_out;
  for (std::size_t k = 0; k < 3; ++k) {
    states[k] = conv_lstm_step(*x, states[k], enc.cells[k], cache ? &cache->cells[k] : nullptr);
    x = &states[k].h;
  }
  Tensor<T> pre_codes = tanh(conv2d_forward(*x, enc.binarizer));
  Tensor<T> codes = binarize(pre_codes, mode, rng);
  if (cache) {
    cache->input = input;
    cache->analysis_out = std::move(analysis_out);
    cache->gdn_out = std::move(gdn_out);
    cache->front_out = std::move(front_out);
    cache->binarizer_in = *x;
    cache->pre_codes = std::move(pre_codes);
  }
  return codes;
}

/// One decoder pass: N x 3 x 16h x 16w estimate with values in (-1, 1).
template <typename T>
Tensor<T> decode_step(const CodecModel<T>& model, const Tensor<T>& codes, DecoderStates<T>& states,
                      DecoderCache<T>* cache = nullptr) {
  if (codes.rank() != 4 || codes.dim(1) != model.config.code_channels) {
    throw ShapeError("decode_step: codes " + to_string(codes.shape()) + " do not have " +
                     std::to_string(model.config.code_channels) + " channels");
  }
  const auto& dec = model.decoder;
  Tensor<T> synthesis_out = conv2d_forward(codes, dec.synthesis);
  Tensor<T> igdn_out = model.config.use_gdn ? igdn_forward(synthesis_out, dec.igdn) : synthesis_out;

  Tensor<T> x = igdn_out;
  for (std::size_t k = 0; k < 4; ++k) {
    states[k] = conv_lstm_step(x, states[k], dec.cells[k], cache ? &cache->cells[k] : nullptr);
    x = depth_to_space(states[k].h, 2);
  }
  Tensor<T> output = tanh(conv2d_forward(x, dec.output));
  if (cache) {
    cache->codes = codes;
    cache->synthesis_out = std::move(synthesis_out);
    cache->igdn_out = std::move(igdn_out);
    cache->output_in = std::move(x);
    cache->output = output;
  }
  return output;
}

/// Backward through one encoder pass, treating the binarizer as identity.
/// `grad_states` enters holding gradients w.r.t. the states this pass
/// produced (empty for the last iteration) and leaves holding gradients
/// w.r.t. the states it consumed. Parameter gradients accumulate in `grads`.
/// Returns the gradient w.r.t. the encoder input.
template <typename T>
Tensor<T> encoder_backward(const CodecModel<T>& model, const EncoderCache<T>& cache, const Tensor<T>& grad_codes,
                           EncoderStates<T>& grad_states, CodecModel<T>& grads) {
  const auto& enc = model.encoder;
  const Tensor<T> grad_pre = detail::tanh_backward(binarize_backward(grad_codes), cache.pre_codes);
  ConvGrads<T> bin = conv2d_backward(grad_pre, cache.binarizer_in, enc.binarizer);
  detail::accumulate_conv(grads.encoder.binarizer, bin);

  Tensor<T> grad_h = std::move(bin.input);
  for (std::size_t k = 3; k-- > 0;) {
    LstmGrads<T> cell = conv_lstm_backward(grad_h, grad_states[k], cache.cells[k], enc.cells[k]);
    detail::accumulate_lstm(grads.encoder.cells[k], cell);
    grad_states[k] = std::move(cell.prev_state);
    grad_h = std::move(cell.input);
  }

  ConvGrads<T> front = conv2d_backward(grad_h, cache.gdn_out, enc.front);
  detail::accumulate_conv(grads.encoder.front, front);
  Tensor<T> grad_analysis = std::move(front.input);
  if (model.config.use_gdn) {
    GdnGrads<T> gdn = gdn_backward(grad_analysis, cache.analysis_out, enc.gdn);
    detail::accumulate_gdn(grads.encoder.gdn, gdn);
    grad_analysis = std::move(gdn.input);
  }
  ConvGrads<T> analysis = conv2d_backward(grad_analysis, cache.input, enc.analysis);
  detail::accumulate_conv(grads.encoder.analysis, analysis);
  return std::move(analysis.input);
}

/// Decoder counterpart of encoder_backward; returns the gradient w.r.t. the
/// codes.
template <typename T>
Tensor<T> decoder_backward(const CodecModel<T>& model, const DecoderCache<T>& cache, const Tensor<T>& grad_output,
                           DecoderStates<T>& grad_states, CodecModel<T>& grads) {
  const auto& dec = model.decoder;
  ConvGrads<T> out = conv2d_backward(detail::tanh_backward(grad_output, cache.output), cache.output_in, dec.output);
  detail::accumulate_conv(grads.decoder.output, out);

  Tensor<T> grad_x = std::move(out.input);
  for (std::size_t k = 4; k-- > 0;) {
    LstmGrads<T> cell =
        conv_lstm_backward(depth_to_space_backward(grad_x, 2), grad_states[k], cache.cells[k], dec.cells[k]);
    detail::accumulate_lstm(grads.decoder.cells[k], cell);
    grad_states[k] = std::move(cell.prev_state);
    grad_x = std::move(cell.input);
  }

  if (model.config.use_gdn) {
    GdnGrads<T> igdn = igdn_backward(grad_x, cache.synthesis_out, dec.igdn);
    detail::accumulate_gdn(grads.decoder.igdn, igdn);
    grad_x = std::move(igdn.input);
  }
  ConvGrads<T> synthesis = conv2d_backward(grad_x, cache.codes, dec.synthesis);
  detail::accumulate_conv(grads.decoder.synthesis, synthesis);
  return std::move(synthesis.input);
}

// ---------------------------------------------------------------------------
// Iterative residual coding

/// Record of an unrolled run. Index t of `reconstructions` and `residuals`
/// holds x_hat_t and r_t for t = 0..T (x_hat_0 = 0, r_0 = x); `codes` and
/// `decoded` hold b_t and Dec(b_t) for t = 1..T at index t - 1.
template <typename T>
struct IterationTrace {
  ReconstructionMode mode = ReconstructionMode::kOneShot;
  std::vector<Tensor<T>> codes;
  std::vector<Tensor<T>> decoded;
  std::vector<Tensor<T>> reconstructions;
  std::vector<Tensor<T>> residuals;

  std::size_t iterations() const { return codes.size(); }
  const Tensor<T>& final_reconstruction() const { return reconstructions.back(); }
};

template <typename T>
struct UnrollCache {
  std::vector<EncoderCache<T>> encoder;
  std::vector<DecoderCache<T>> decoder;
};

/// Image-domain offset between the centred codec signal and [0, 1] pixels.
inline constexpr double kCenter = 0.5;

/// x_hat_t from x_hat_{t-1} and the decoder output, clamped to [0, 1].
template <typename T>
Tensor<T> reconstruct(const Tensor<T>& previous, const Tensor<T>& decoded, ReconstructionMode mode) {
  if (mode == ReconstructionMode::kOneShot) {
    return map(decoded, [](T d) { return std::clamp(d + T(kCenter), T(0), T(1)); });
  }
  return zip(previous, decoded, "reconstruct", [](T p, T d) { return std::clamp(p + d, T(0), T(1)); });
}

/// Encoder input for iteration t (1-based): the centred image at t = 1, the
/// raw residual r_{t-1} afterwards.
template <typename T>
Tensor<T> encoder_input(const IterationTrace<T>& trace, std::size_t t) {
  return t == 1 ? add(trace.residuals[0], T(-kCenter)) : trace.residuals[t - 1];
}

/// Runs T encode/decode iterations with persistent LSTM states.
template <typename T>
IterationTrace<T> forward_unroll(const CodecModel<T>& model, const Tensor<T>& image, std::size_t iterations,
                                 ReconstructionMode mode, BinarizeMode binarize_mode, Rng* rng = nullptr,
                                 UnrollCache<T>* cache = nullptr) {
  if (iterations < 1) throw Error("compress: iterations must be >= 1");
  require_codec_dims(image.shape(), ArchitectureConfig::kInputChannels, "compress");
  IterationTrace<T> trace;
  trace.mode = mode;
  trace.reconstructions.push_back(Tensor<T>(image.shape()));
  trace.residuals.push_back(image);
  if (cache) {
    cache->encoder.assign(iterations, {});
    cache->decoder.assign(iterations, {});
  }

  EncoderStates<T> enc_states;
  DecoderStates<T> dec_states;
  for (std::size_t t = 1; t <= iterations; ++t) {
    trace.codes.push_back(encode_step(model, encoder_input(trace, t), enc_states, binarize_mode, rng,
                                      cache ? &cache->encoder[t - 1] : nullptr));
    trace.decoded.push_back(
        decode_step(model, trace.codes.back(), dec_states, cache ? &cache->decoder[t - 1] : nullptr));
    trace.reconstructions.push_back(reconstruct(trace.reconstructions.back(), trace.decoded.back(), mode));
    trace.residuals.push_back(sub(image, trace.reconstructions.back()));
  }
  return trace;
}

/// Inference-mode compression of an image in [0, 1] with H, W divisible by 16.
template <typename T>
IterationTrace<T> compress(const CodecModel<T>& model, const Tensor<T>& image, std::size_t iterations,
                           ReconstructionMode mode) {
  return forward_unroll(model, image, iterations, mode, BinarizeMode::kInferenceSign);
}

/// Reconstruction after decoding every code tensor in order. Decoding a
/// prefix of a longer code list yields the matching intermediate x_hat_t.
template <typename T>
Tensor<T> decompress(const CodecModel<T>& model, std::span<const Tensor<T>> codes, ReconstructionMode mode) {
  if (codes.empty()) throw Error("decompress: empty code list");
  DecoderStates<T> states;
  Tensor<T> recon;
  for (const Tensor<T>& b : codes) {
    const Tensor<T> decoded = decode_step(model, b, states);
    recon = reconstruct(recon.empty() ? Tensor<T>(decoded.shape()) : recon, decoded, mode);
  }
  return recon;
}

}  // namespace grnc
