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

#include <gtest/gtest.h>

#include <string>

#include "grnc/run_config.hpp"

namespace grnc {
namespace {

std::string error_of(RunConfig& config, const std::string& text) {
  try {
    config.apply_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(RunConfigTest, DefaultsMatchLibraryDefaults) {
  const RunConfig config;
  EXPECT_EQ(config.arch, ArchitectureConfig{});
  EXPECT_EQ(config.train.learning_rate, 0.0005);
  EXPECT_EQ(config.train.batch_size, 16u);
  EXPECT_NO_THROW(config.validate());
}

TEST(RunConfigTest, ParsesFileBody) {
  RunConfig config;
  config.apply_text(
      "# desk run\n"
      "preset = desk\n"
      "encoder_hidden = 16, 32,32\n"
      "decoder_hidden=32,32,16,16\n"
      "mode=additive   # accumulate\n"
      "\n"
      "iterations=4\n"
      "lr=0.001\n"
      "steps=25\n"
      "use_gdn=false\n"
      "loss_norm=sum\n"
      "stochastic_binarizer=0\n");
  EXPECT_EQ(config.arch.analysis_channels, ArchitectureConfig::desk().analysis_channels);
  EXPECT_EQ(config.arch.encoder_hidden, (std::array<std::size_t, 3>{16, 32, 32}));
  EXPECT_EQ(config.arch.decoder_hidden, (std::array<std::size_t, 4>{32, 32, 16, 16}));
  EXPECT_EQ(config.arch.mode, ReconstructionMode::kAdditive);
  EXPECT_EQ(config.arch.iterations, 4u);
  EXPECT_EQ(config.train.iterations, 4u);
  EXPECT_EQ(config.train.learning_rate, 0.001);
  EXPECT_EQ(config.train.total_steps(), 25u);
  EXPECT_FALSE(config.arch.use_gdn);
  EXPECT_EQ(config.train.normalization, LossNormalization::kSum);
  EXPECT_FALSE(config.train.stochastic_binarizer);
  EXPECT_NO_THROW(config.validate());
}

TEST(RunConfigTest, OverridesApplyInOrder) {
  RunConfig config;
  config.apply_override("code_channels=32");
  config.apply_override("code_channels = 16");
  EXPECT_EQ(config.arch.code_channels, 16u);
  config.apply_override("patch_size=64");
  EXPECT_EQ(config.train.patch_size, 64u);
  EXPECT_EQ(config.arch.patch_size, 64u);
}

TEST(RunConfigTest, EveryKeyIsAccepted) {
  for (const std::string& key : RunConfig::keys()) {
    RunConfig config;
    const std::string value = key == "preset"                                  ? "desk"
                              : key == "mode"                                  ? "one_shot"
                              : key == "loss_norm"                             ? "mean"
                              : key == "use_gdn" || key == "stochastic_binarizer" ? "true"
                              : key == "encoder_hidden"                        ? "8,8,8"
                              : key == "decoder_hidden"                        ? "8,8,8,8"
                              : key == "patch_size"                            ? "48"
                              : key.starts_with("adam_beta")                   ? "0.5"
                                                                               : "3";
    EXPECT_NO_THROW(config.set(key, value)) << key;
  }
}

TEST(RunConfigTest, Errors) {
  RunConfig config;
  EXPECT_EQ(error_of(config, "colour=blue"), "config: unknown key 'colour'");
  EXPECT_NE(error_of(config, "batch_size=-3").find("non-negative integer"), std::string::npos);
  EXPECT_NE(error_of(config, "lr=fast").find("expects a number"), std::string::npos);
  EXPECT_NE(error_of(config, "encoder_hidden=1,2").find("3 comma-separated"), std::string::npos);
  EXPECT_NE(error_of(config, "mode=sideways").find("one_shot or additive"), std::string::npos);
  EXPECT_NE(error_of(config, "just words").find("key=value"), std::string::npos);
  config = RunConfig{};
  config.apply_text("patch_size=40");
  EXPECT_THROW(config.validate(), Error);
}

}  // namespace
}  // namespace grnc
