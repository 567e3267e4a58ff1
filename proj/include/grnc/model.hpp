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

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "grnc/bytes.hpp"
#include "grnc/layers.hpp"
#include "grnc/random.hpp"

namespace grnc {

/// gamma = 0 reconstructs each iteration from scratch; gamma = 1 adds the
/// decoder output to the previous reconstruction.
enum class ReconstructionMode : std::uint8_t { kOneShot = 0, kAdditive = 1 };

inline std::string_view to_string(ReconstructionMode mode) {
  return mode == ReconstructionMode::kOneShot ? "one_shot" : "additive";
}

/// Channel plan of the recurrent codec.
///
/// Encoder: analysis conv (3 -> analysis, 3x3, s1) + GDN, front conv
/// (analysis -> front, 3x3, s2), three ConvLSTM cells each downsampling by 2,
/// binarizer 1x1 conv (-> code_channels) + tanh + sign.
///
/// Decoder: synthesis 1x1 conv (code -> synthesis) + inverse GDN, four
/// ConvLSTM cells each followed by depth-to-space(2), output 3x3 conv + tanh.
/// Cell k + 1 consumes decoder_hidden[k] / 4 channels.
struct ArchitectureConfig {
  std::size_t patch_size = 32;
  std::size_t analysis_channels = 64;
  std::size_t front_channels = 64;
  std::array<std::size_t, 3> encoder_hidden{256, 512, 512};
  std::size_t code_channels = 38;
  std::size_t synthesis_channels = 512;
  std::array<std::size_t, 4> decoder_hidden{512, 512, 256, 128};
  bool use_gdn = true;
  ReconstructionMode mode = ReconstructionMode::kOneShot;
  std::size_t iterations = 8;

  static constexpr std::size_t kInputChannels = 3;
  static constexpr std::size_t kDownsampling = 16;

  /// Narrow channel plan with the same topology, sized for single-core
  /// training runs.
  static ArchitectureConfig desk() {
    ArchitectureConfig c;
    c.analysis_channels = 16;
    c.front_channels = 32;
    c.encoder_hidden = {32, 64, 64};
    c.synthesis_channels = 64;
    c.decoder_hidden = {64, 64, 32, 32};
    return c;
  }

  std::size_t decoder_input_channels(std::size_t cell) const {
    return cell == 0 ? synthesis_channels : decoder_hidden[cell - 1] / 4;
  }
  std::size_t output_conv_channels() const { return decoder_hidden[3] / 4; }

  void validate() const {
    auto positive = [](std::size_t v, const char* name) {
      if (v == 0) throw Error(std::string("config: ") + name + " must be positive");
    };
    positive(analysis_channels, "analysis_channels");
    positive(front_channels, "front_channels");
    positive(code_channels, "code_channels");
    positive(synthesis_channels, "synthesis_channels");
    positive(iterations, "iterations");
    for (std::size_t h : encoder_hidden) positive(h, "encoder_hidden");
    for (std::size_t h : decoder_hidden) {
      if (h == 0 || h % 4 != 0) throw Error("config: decoder_hidden entries must be positive multiples of 4");
    }
    if (patch_size == 0 || patch_size % kDownsampling != 0) {
      throw Error("config: patch_size must be a positive multiple of 16");
    }
  }

  bool operator==(const ArchitectureConfig&) const = default;
};

template <typename T>
struct EncoderParams {
  ConvParams<T> analysis;
  GdnParams<T> gdn;
  ConvParams<T> front;
  std::array<LstmParams<T>, 3> cells;
  ConvParams<T> binarizer;
};

template <typename T>
struct DecoderParams {
  ConvParams<T> synthesis;
  GdnParams<T> igdn;
  std::array<LstmParams<T>, 4> cells;
  ConvParams<T> output;
};

template <typename T>
struct CodecModel {
  static constexpr std::uint16_t kFormatVersion = 1;

  ArchitectureConfig config;
  EncoderParams<T> encoder;
  DecoderParams<T> decoder;
};

enum class ParamKind { kWeight, kBias, kGdnBeta, kGdnGamma };

namespace detail {

template <typename F, typename... C>
void visit_conv(const std::string& name, F& f, C&... convs) {
  f(name + ".weight", ParamKind::kWeight, convs.weight...);
  f(name + ".bias", ParamKind::kBias, convs.bias...);
}

template <typename F, typename... G>
void visit_gdn(const std::string& name, F& f, G&... gdns) {
  f(name + ".beta", ParamKind::kGdnBeta, gdns.beta...);
  f(name + ".gamma", ParamKind::kGdnGamma, gdns.gamma...);
}

}  // namespace detail

/// Calls f(name, kind, tensor...) for every parameter tensor in declaration
/// order, walking several identically shaped models in lockstep.
template <typename F, typename... M>
void visit_parameters(F&& f, M&... models) {
  detail::visit_conv("encoder.analysis", f, models.encoder.analysis...);
  detail::visit_gdn("encoder.gdn", f, models.encoder.gdn...);
  detail::visit_conv("encoder.front", f, models.encoder.front...);
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string cell = "encoder.cell" + std::to_string(k + 1);
    detail::visit_conv(cell + ".input_conv", f, models.encoder.cells[k].input_conv...);
    detail::visit_conv(cell + ".hidden_conv", f, models.encoder.cells[k].hidden_conv...);
  }
  detail::visit_conv("encoder.binarizer", f, models.encoder.binarizer...);
  detail::visit_conv("decoder.synthesis", f, models.decoder.synthesis...);
  detail::visit_gdn("decoder.igdn", f, models.decoder.igdn...);
  for (std::size_t k = 0; k < 4; ++k) {
    const std::string cell = "decoder.cell" + std::to_string(k + 1);
    detail::visit_conv(cell + ".input_conv", f, models.decoder.cells[k].input_conv...);
    detail::visit_conv(cell + ".hidden_conv", f, models.decoder.cells[k].hidden_conv...);
  }
  detail::visit_conv("decoder.output", f, models.decoder.output...);
}

/// Model with the config's topology and every parameter zero (GDN included).
/// Used for gradient accumulators and optimizer moments.
template <typename T>
CodecModel<T> zero_model(const ArchitectureConfig& config) {
  config.validate();
  using Conv = ConvParams<T>;
  CodecModel<T> m;
  m.config = config;
  const std::size_t in = ArchitectureConfig::kInputChannels;
  m.encoder.analysis = Conv::zeros(config.analysis_channels, in, 3, 1, 1);
  m.encoder.gdn = {Tensor<T>({config.analysis_channels}), Tensor<T>({config.analysis_channels, config.analysis_channels})};
  m.encoder.front = Conv::zeros(config.front_channels, config.analysis_channels, 3, 2, 1);
  std::size_t prev = config.front_channels;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t h = config.encoder_hidden[k];
    m.encoder.cells[k] = {Conv::zeros(4 * h, prev, 3, 2, 1), Conv::zeros(4 * h, h, 1, 1, 0)};
    prev = h;
  }
  m.encoder.binarizer = Conv::zeros(config.code_channels, prev, 1, 1, 0);

  m.decoder.synthesis = Conv::zeros(config.synthesis_channels, config.code_channels, 1, 1, 0);
  m.decoder.igdn = {Tensor<T>({config.synthesis_channels}),
                    Tensor<T>({config.synthesis_channels, config.synthesis_channels})};
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t h = config.decoder_hidden[k];
    m.decoder.cells[k] = {Conv::zeros(4 * h, config.decoder_input_channels(k), 3, 1, 1),
                          Conv::zeros(4 * h, h, 1, 1, 0)};
  }
  m.decoder.output = Conv::zeros(in, config.output_conv_channels(), 3, 1, 1);
  return m;
}

/// Deterministic initialization: Glorot-uniform weights, zero biases,
/// GDN beta = 1 and gamma = 0.1 * identity.
template <typename T>
CodecModel<T> build_model(const ArchitectureConfig& config, std::uint64_t seed) {
  CodecModel<T> m = zero_model<T>(config);
  Rng rng(seed);
  visit_parameters(
      [&rng](const std::string&, ParamKind kind, Tensor<T>& t) {
        switch (kind) {
          case ParamKind::kWeight: {
            const std::size_t receptive = t.dim(2) * t.dim(3);
            const double fan_in = static_cast<double>(t.dim(1) * receptive);
            const double fan_out = static_cast<double>(t.dim(0) * receptive);
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (T& v : t.values()) v = static_cast<T>(uniform(rng, -bound, bound));
            break;
          }
          case ParamKind::kBias:
            t.fill(T(0));
            break;
          case ParamKind::kGdnBeta:
            t.fill(T(1));
            break;
          case ParamKind::kGdnGamma: {
            t.fill(T(0));
            for (std::size_t i = 0; i < t.dim(0); ++i) t[i * t.dim(0) + i] = T(0.1);
            break;
          }
        }
      },
      m);
  return m;
}

template <typename T>
std::size_t parameter_count(const CodecModel<T>& model) {
  std::size_t n = 0;
  visit_parameters([&n](const std::string&, ParamKind, const Tensor<T>& t) { n += t.size(); }, model);
  return n;
}

template <typename T>
void project_gdn(CodecModel<T>& model) {
  model.encoder.gdn.project();
  model.decoder.igdn.project();
}

// ---------------------------------------------------------------------------
// Checkpoint format "GRNM"
//
//   magic "GRNM" | u16 version | config | tensors in visit order
//   config : u32 patch, analysis, front, enc[3], code, synthesis, dec[4],
//            iterations | u8 use_gdn | u8 mode
//   tensor : u8 rank | u32 extents[rank] | f32 values[]
// All multi-byte fields little-endian.

namespace detail {

inline void write_config(ByteWriter& w, const ArchitectureConfig& c) {
  auto u = [&w](std::size_t v) { w.u32(static_cast<std::uint32_t>(v)); };
  u(c.patch_size);
  u(c.analysis_channels);
  u(c.front_channels);
  for (std::size_t h : c.encoder_hidden) u(h);
  u(c.code_channels);
  u(c.synthesis_channels);
  for (std::size_t h : c.decoder_hidden) u(h);
  u(c.iterations);
  w.u8(c.use_gdn ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(c.mode));
}

inline ArchitectureConfig read_config(ByteReader& r) {
  ArchitectureConfig c;
  c.patch_size = r.u32();
  c.analysis_channels = r.u32();
  c.front_channels = r.u32();
  for (std::size_t& h : c.encoder_hidden) h = r.u32();
  c.code_channels = r.u32();
  c.synthesis_channels = r.u32();
  for (std::size_t& h : c.decoder_hidden) h = r.u32();
  c.iterations = r.u32();
  const std::uint8_t gdn = r.u8(), mode = r.u8();
  if (gdn > 1 || mode > 1) throw FormatError(FormatError::Kind::kMalformed, "checkpoint: invalid config flags");
  c.use_gdn = gdn == 1;
  c.mode = static_cast<ReconstructionMode>(mode);
  try {
    c.validate();
  } catch (const Error& e) {
    throw FormatError(FormatError::Kind::kMalformed, std::string("checkpoint: ") + e.what());
  }
  return c;
}

}  // namespace detail

template <typename T>
Bytes save_checkpoint(const CodecModel<T>& model) {
  ByteWriter w;
  w.tag("GRNM");
  w.u16(CodecModel<T>::kFormatVersion);
  detail::write_config(w, model.config);
  visit_parameters(
      [&w](const std::string&, ParamKind, const Tensor<T>& t) {
        w.u8(static_cast<std::uint8_t>(t.rank()));
        for (std::size_t extent : t.shape()) w.u32(static_cast<std::uint32_t>(extent));
        for (T v : t.values()) w.f32(static_cast<float>(v));
      },
      model);
  return std::move(w).bytes();
}

template <typename T>
CodecModel<T> load_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  if (!r.tag_is("GRNM")) throw FormatError(FormatError::Kind::kBadMagic, "checkpoint: bad magic");
  const std::uint16_t version = r.u16();
  if (version != CodecModel<T>::kFormatVersion) {
    throw FormatError(FormatError::Kind::kUnsupportedVersion,
                      "checkpoint: unsupported version " + std::to_string(version));
  }
  CodecModel<T> m = zero_model<T>(detail::read_config(r));
  visit_parameters(
      [&r](const std::string& name, ParamKind, Tensor<T>& t) {
        const std::size_t rank = r.u8();
        Shape shape(rank);
        for (std::size_t& extent : shape) extent = r.u32();
        if (shape != t.shape()) {
          throw FormatError(FormatError::Kind::kMalformed, "checkpoint: tensor " + name + " has shape " +
                                                               to_string(shape) + ", config expects " +
                                                               to_string(t.shape()));
        }
        for (T& v : t.values()) v = static_cast<T>(r.f32());
      },
      m);
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::kMalformed, "checkpoint: trailing bytes");
  return m;
}

}  // namespace grnc
