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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "grnc/grnc.hpp"
#include "synthetic.hpp"

namespace grnc {
namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "grnc");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_text(const fs::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

// Drops the wall-clock column so two runs can be compared.
std::string without_timing(const std::string& log) {
  std::istringstream in(log);
  std::string line, kept;
  while (std::getline(in, line)) kept += line.substr(0, line.rfind(',')) + "\n";
  return kept;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("grnc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "images");
    write_file(dir_ / "images" / "a.ppm", save_ppm(testing::synthetic_buffer(40, 36, 1)));
    write_file(dir_ / "images" / "b.ppm", save_ppm(testing::synthetic_buffer(32, 48, 2)));
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // A small model trained for a couple of steps.
  fs::path tiny_checkpoint(const std::string& name = "model.grnm", const std::string& steps = "2") {
    const Invocation r = invoke({"train", (dir_ / "images").string(), path(name).string(), "--set", "preset=desk",
                                 "--set", "steps=" + steps, "--set", "batch_size=2", "--set", "iterations=4", "--set",
                                 "analysis_channels=4", "--set", "front_channels=4", "--set", "encoder_hidden=8,8,8",
                                 "--set", "synthesis_channels=8", "--set", "decoder_hidden=8,8,8,8"});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, TrainRejectsEmptyDataDirectory) {
  fs::create_directories(path("empty"));
  const Invocation r = invoke({"train", path("empty").string(), path("m.grnm").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("no training images"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("m.grnm")));
}

TEST_F(CliTest, TrainRejectsUnknownConfigKey) {
  std::ofstream(path("run.cfg")) << "colour=blue\n";
  const Invocation r =
      invoke({"train", "--config", path("run.cfg").string(), (dir_ / "images").string(), path("m.grnm").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err, "error: config: unknown key 'colour'\n");
}

TEST_F(CliTest, SeededTrainingLogsAreIdentical) {
  const fs::path first = tiny_checkpoint("first.grnm", "50");
  const fs::path second = tiny_checkpoint("second.grnm", "50");
  const std::string log = read_text(first.string() + ".log.csv");
  EXPECT_EQ(without_timing(log), without_timing(read_text(second.string() + ".log.csv")));
  EXPECT_EQ(read_file(first), read_file(second));
  EXPECT_EQ(log.rfind("# lr=0.0005 ", 0), 0u) << log.substr(0, 80);
  EXPECT_NE(log.find("\nstep,loss,seconds\n"), std::string::npos);
  EXPECT_NE(log.find("\n50,"), std::string::npos);
}

TEST_F(CliTest, EncodeDecodeMatchesLibrary) {
  const fs::path model_path = tiny_checkpoint();
  const Invocation enc =
      invoke({"encode", model_path.string(), path("images/a.ppm").string(), path("a.grnb").string()});
  ASSERT_EQ(enc.code, 0) << enc.err;
  EXPECT_EQ(enc.out, "bpp 0.59375\n");  // 4 iterations x 38 channels / 256

  const Invocation again =
      invoke({"encode", model_path.string(), path("images/a.ppm").string(), path("a2.grnb").string()});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(read_file(path("a.grnb")), read_file(path("a2.grnb")));

  const Invocation dec = invoke({"decode", model_path.string(), path("a.grnb").string(), path("a.out.ppm").string()});
  ASSERT_EQ(dec.code, 0) << dec.err;
  EXPECT_TRUE(dec.err.empty()) << dec.err;

  const CodecModel<float> model = load_checkpoint<float>(read_file(model_path));
  const Tensor<float> image = to_tensor<float>(load_ppm(read_file(path("images/a.ppm"))));
  const PaddedTensor<float> padded = pad_to_multiple(image);
  const IterationTrace<float> trace = compress(model, padded.tensor, 4, model.config.mode);
  const ImageBuffer expected = to_image(crop(trace.final_reconstruction(), 40, 36));
  EXPECT_EQ(read_file(path("a.out.ppm")), save_ppm(expected));
}

TEST_F(CliTest, ProgressiveDecode) {
  const fs::path model_path = tiny_checkpoint();
  ASSERT_EQ(invoke({"encode", model_path.string(), path("images/b.ppm").string(), path("b.grnb").string(),
                    "--iterations", "3"})
                .code,
            0);
  for (const std::string k : {"1", "3"}) {
    const Invocation r = invoke({"decode", model_path.string(), path("b.grnb").string(),
                                 path("b" + k + ".ppm").string(), "--iterations", k});
    EXPECT_EQ(r.code, 0) << r.err;
    const ImageBuffer img = load_ppm(read_file(path("b" + k + ".ppm")));
    EXPECT_EQ(img.width, 48u);
    EXPECT_EQ(img.height, 32u);
  }
  EXPECT_NE(read_file(path("b1.ppm")), read_file(path("b3.ppm")));
  const Invocation r =
      invoke({"decode", model_path.string(), path("b.grnb").string(), path("b4.ppm").string(), "--iterations", "4"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("stream holds 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, DigestMismatchWarnsOrFails) {
  const fs::path first = tiny_checkpoint("first.grnm", "1");
  const fs::path second = tiny_checkpoint("second.grnm", "2");
  ASSERT_EQ(invoke({"encode", first.string(), path("images/a.ppm").string(), path("a.grnb").string()}).code, 0);
  const Invocation lax = invoke({"decode", second.string(), path("a.grnb").string(), path("x.ppm").string()});
  EXPECT_EQ(lax.code, 0);
  EXPECT_NE(lax.err.find("warning: model digest"), std::string::npos);
  const Invocation strict =
      invoke({"decode", second.string(), path("a.grnb").string(), path("y.ppm").string(), "--strict"});
  EXPECT_NE(strict.code, 0);
  EXPECT_FALSE(fs::exists(path("y.ppm")));
}

TEST_F(CliTest, EncodeErrors) {
  Invocation r = invoke({"encode", path("missing.grnm").string(), path("images/a.ppm").string(), path("a.grnb").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1);
  const fs::path model_path = tiny_checkpoint();
  r = invoke({"encode", model_path.string(), path("images/missing.ppm").string(), path("a.grnb").string()});
  EXPECT_NE(r.code, 0);
  r = invoke({"encode", model_path.string(), path("images/a.ppm").string(), path("a.grnb").string(), "--mode", "both"});
  EXPECT_NE(r.code, 0);
}

TEST_F(CliTest, EvalWritesSortedRows) {
  const fs::path model_path = tiny_checkpoint();
  std::ofstream(path("images/c.ppm")) << "not an image";
  const Invocation r =
      invoke({"eval", model_path.string(), (dir_ / "images").string(), path("rd.csv").string(), "--max-iterations", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning: skipping c.ppm"), std::string::npos);

  std::istringstream csv(read_text(path("rd.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "image,iteration,bpp,psnr_db,ms_ssim");
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].rfind("a.ppm,1,0.1484375,", 0), 0u) << rows[0];
  EXPECT_EQ(rows[3].rfind("a.ppm,4,0.59375,", 0), 0u) << rows[3];
  EXPECT_EQ(rows[4].rfind("b.ppm,1,", 0), 0u) << rows[4];

  const Invocation strict = invoke({"eval", model_path.string(), (dir_ / "images").string(),
                                    path("rd2.csv").string(), "--max-iterations", "2", "--strict"});
  EXPECT_NE(strict.code, 0);
}

TEST_F(CliTest, EvalRowsIndependentOfThreadCount) {
  const fs::path model_path = tiny_checkpoint();
  ::setenv("GRNC_THREADS", "1", 1);
  EXPECT_EQ(cli::worker_count(), 1u);
  ASSERT_EQ(invoke({"eval", model_path.string(), (dir_ / "images").string(), path("one.csv").string(),
                    "--max-iterations", "2"})
                .code,
            0);
  ::setenv("GRNC_THREADS", "3", 1);
  EXPECT_EQ(cli::worker_count(), 3u);
  ASSERT_EQ(invoke({"eval", model_path.string(), (dir_ / "images").string(), path("three.csv").string(),
                    "--max-iterations", "2"})
                .code,
            0);
  ::unsetenv("GRNC_THREADS");
  EXPECT_EQ(read_text(path("one.csv")), read_text(path("three.csv")));
}

TEST_F(CliTest, GradcheckPassesAndReportsEachOpOnce) {
  const Invocation r = invoke({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.err;
  std::vector<std::string> reported;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) reported.push_back(line.substr(0, line.find(' ')));
  EXPECT_EQ(reported, gradcheck_ops());
}

TEST_F(CliTest, GradcheckFaultNamesOp) {
  const Invocation r = invoke({"gradcheck", "--inject-fault", "gdn_backward"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("gdn_backward"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("igdn_backward"), std::string::npos) << r.err;
}

TEST_F(CliTest, BinaryRunsAsSubprocess) {
  const std::string command = std::string(GRNC_TOOL_PATH) + " gradcheck --seeds 20 > " + path("gc.txt").string();
  EXPECT_EQ(std::system(command.c_str()), 0);
  EXPECT_NE(read_text(path("gc.txt")).find("conv2d_backward"), std::string::npos);
  EXPECT_NE(std::system((std::string(GRNC_TOOL_PATH) + " nonsense 2> /dev/null").c_str()), 0);
}

}  // namespace
}  // namespace grnc
