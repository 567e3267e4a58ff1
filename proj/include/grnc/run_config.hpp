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
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "grnc/error.hpp"
#include "grnc/model.hpp"
#include "grnc/training.hpp"

namespace grnc {

/// Architecture and training settings read from a flat `key=value` file
/// (blank lines and `#` comments allowed) plus command-line overrides.
struct RunConfig {
  ArchitectureConfig arch;
  TrainConfig train;

  /// Applies one setting. `preset` replaces the channel plan, so it should
  /// come before individual channel keys.
  void set(const std::string& key, const std::string& value);

  /// Applies every line of a config file body.
  void apply_text(std::string_view text);

  /// Applies a `key=value` override.
  void apply_override(std::string_view assignment);

  void validate() const {
    arch.validate();
    train.validate();
    if (arch.patch_size != train.patch_size) throw Error("config: patch_size mismatch");
  }

  static const std::vector<std::string>& keys();
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error("config: " + key + " expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  double out = 0.0;
  in >> out;
  if (!in || !in.eof()) throw Error("config: " + key + " expects a number, got '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw Error("config: " + key + " expects true/false, got '" + value + "'");
}

template <std::size_t N>
std::array<std::size_t, N> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::string> items;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) items.push_back(trim(item));
  if (items.size() != N) {
    throw Error("config: " + key + " expects " + std::to_string(N) + " comma-separated integers");
  }
  std::array<std::size_t, N> out{};
  for (std::size_t n = 0; n < N; ++n) out[n] = parse_uint(key, items[n]);
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "preset",        "patch_size", "analysis_channels", "front_channels", "encoder_hidden", "code_channels",
      "synthesis_channels", "decoder_hidden", "use_gdn", "mode", "iterations", "lr", "batch_size", "epochs",
      "steps_per_epoch", "steps", "loss_weight", "loss_norm", "seed", "adam_beta1", "adam_beta2", "adam_eps",
      "stochastic_binarizer"};
  return k;
}

inline void RunConfig::set(const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "preset") {
    if (value == "default") {
      const auto keep = arch;
      arch = ArchitectureConfig{};
      arch.patch_size = keep.patch_size;
      arch.mode = keep.mode;
      arch.iterations = keep.iterations;
    } else if (value == "desk") {
      const auto keep = arch;
      arch = ArchitectureConfig::desk();
      arch.patch_size = keep.patch_size;
      arch.mode = keep.mode;
      arch.iterations = keep.iterations;
    } else {
      throw Error("config: preset must be 'default' or 'desk', got '" + value + "'");
    }
  } else if (key == "patch_size") {
    arch.patch_size = train.patch_size = parse_uint(key, value);
  } else if (key == "analysis_channels") {
    arch.analysis_channels = parse_uint(key, value);
  } else if (key == "front_channels") {
    arch.front_channels = parse_uint(key, value);
  } else if (key == "encoder_hidden") {
    arch.encoder_hidden = parse_list<3>(key, value);
  } else if (key == "code_channels") {
    arch.code_channels = parse_uint(key, value);
  } else if (key == "synthesis_channels") {
    arch.synthesis_channels = parse_uint(key, value);
  } else if (key == "decoder_hidden") {
    arch.decoder_hidden = parse_list<4>(key, value);
  } else if (key == "use_gdn") {
    arch.use_gdn = parse_bool(key, value);
  } else if (key == "mode") {
    if (value == "one_shot") {
      arch.mode = ReconstructionMode::kOneShot;
    } else if (value == "additive") {
      arch.mode = ReconstructionMode::kAdditive;
    } else {
      throw Error("config: mode must be one_shot or additive, got '" + value + "'");
    }
  } else if (key == "iterations") {
    arch.iterations = train.iterations = parse_uint(key, value);
  } else if (key == "lr") {
    train.learning_rate = parse_real(key, value);
  } else if (key == "batch_size") {
    train.batch_size = parse_uint(key, value);
  } else if (key == "epochs") {
    train.epochs = parse_uint(key, value);
  } else if (key == "steps_per_epoch") {
    train.steps_per_epoch = parse_uint(key, value);
  } else if (key == "steps") {
    train.steps = parse_uint(key, value);
  } else if (key == "loss_weight") {
    train.loss_weight = parse_real(key, value);
  } else if (key == "loss_norm") {
    if (value == "mean") {
      train.normalization = LossNormalization::kMean;
    } else if (value == "sum") {
      train.normalization = LossNormalization::kSum;
    } else {
      throw Error("config: loss_norm must be mean or sum, got '" + value + "'");
    }
  } else if (key == "seed") {
    train.seed = parse_uint(key, value);
  } else if (key == "adam_beta1") {
    train.adam_beta1 = parse_real(key, value);
  } else if (key == "adam_beta2") {
    train.adam_beta2 = parse_real(key, value);
  } else if (key == "adam_eps") {
    train.adam_epsilon = parse_real(key, value);
  } else if (key == "stochastic_binarizer") {
    train.stochastic_binarizer = parse_bool(key, value);
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

inline void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error("config: expected key=value, got '" + std::string(assignment) + "'");
  set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

inline void RunConfig::apply_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = detail::trim(line);
    if (!body.empty()) apply_override(body);
  }
}

}  // namespace grnc
