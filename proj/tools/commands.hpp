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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "grnc/model.hpp"

namespace grnc::cli {

struct TrainArgs {
  std::filesystem::path config_file;  // optional
  std::vector<std::string> overrides;
  std::filesystem::path data_dir;
  std::filesystem::path checkpoint;
  std::filesystem::path log;  // defaults to <checkpoint>.log.csv
};

struct EncodeArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::size_t> iterations;
  std::optional<ReconstructionMode> mode;
};

struct DecodeArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::size_t> iterations;
  bool strict = false;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path image_dir;
  std::filesystem::path csv;
  std::size_t max_iterations = 8;
  bool strict = false;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
  std::size_t seeds = 20;
  std::string fault;
};

// Each command returns a process exit code. Failures print one line
// "error: <reason>" to `err`.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_encode(const EncodeArgs& args, std::ostream& out, std::ostream& err);
int cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out, std::ostream& err);

/// Worker count for eval: GRNC_THREADS if set and positive, else the
/// hardware concurrency.
std::size_t worker_count();

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace grnc::cli
