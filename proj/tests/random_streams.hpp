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

#include <vector>

#include "grnc/bitstream.hpp"
#include "grnc/random.hpp"

namespace grnc::testing {

struct RandomStream {
  BitstreamHeader header;
  std::vector<Tensor<float>> codes;
};

inline RandomStream random_stream(Rng& rng) {
  RandomStream s;
  BitstreamHeader& h = s.header;
  h.padded_width = static_cast<std::uint32_t>(16 * (1 + uniform_index(rng, 6)));
  h.padded_height = static_cast<std::uint32_t>(16 * (1 + uniform_index(rng, 6)));
  h.width = static_cast<std::uint32_t>(h.padded_width - uniform_index(rng, 16));
  h.height = static_cast<std::uint32_t>(h.padded_height - uniform_index(rng, 16));
  h.iterations = static_cast<std::uint16_t>(1 + uniform_index(rng, 8));
  h.code_channels = static_cast<std::uint16_t>(1 + uniform_index(rng, 40));
  h.mode = uniform_index(rng, 2) == 0 ? ReconstructionMode::kOneShot : ReconstructionMode::kAdditive;
  for (auto& byte : h.model_digest) byte = static_cast<std::uint8_t>(uniform_index(rng, 256));
  for (std::size_t t = 0; t < h.iterations; ++t) {
    Tensor<float> b(h.code_shape());
    for (float& v : b.values()) v = uniform_index(rng, 2) == 0 ? -1.0f : 1.0f;
    s.codes.push_back(std::move(b));
  }
  return s;
}

}  // namespace grnc::testing
