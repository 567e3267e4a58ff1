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
#include <cstdint>
#include <span>

#include <openssl/evp.h>

#include "grnc/bytes.hpp"
#include "grnc/error.hpp"
#include "grnc/model.hpp"

namespace grnc {

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &length, EVP_sha256(), nullptr) != 1 || length != out.size()) {
    throw Error("sha256: digest computation failed");
  }
  return out;
}

/// Identifies a model by the SHA-256 of its serialized checkpoint.
template <typename T>
Digest model_digest(const CodecModel<T>& model) {
  return sha256(save_checkpoint(model));
}

}  // namespace grnc
