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

// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "grnc/grnc.hpp"
#include "metric_pairs.hpp"
#include "random_streams.hpp"
#include "synthetic.hpp"

namespace {

using namespace grnc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Tensor<double> random_tensor(Rng& rng, Shape shape, double lo, double hi) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

// State shared by the training-dependent criteria.
struct DeskRun {
  bool trained = false;
  CodecModel<float> model;
};

Outcome gradient_suite() {
  Outcome o;
  const auto start = Clock::now();
  const std::vector<GradcheckReport> reports = run_gradient_checks(GradcheckOptions{});
  const double elapsed = seconds_since(start);
  o.require(reports.size() == gradcheck_ops().size(), "missing ops");
  for (const GradcheckReport& r : reports) {
    o.require(r.passed, r.op + " max rel err " + fmt(r.max_error));
    o.require(r.seeds >= 20, r.op + " ran " + std::to_string(r.seeds) + " seeds");
  }
  double worst = 0.0;
  for (const GradcheckReport& r : reports) worst = std::max(worst, r.max_error);
  o.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
  o.note(std::to_string(reports.size()) + " ops, worst rel err " + fmt(worst, 3) + ", " + fmt(elapsed, 3) + " s");
  return o;
}

Outcome gdn_degenerate() {
  Outcome o;
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t channels = 1 + uniform_index(rng, 8);
    const Tensor<double> w = random_tensor(rng, {2, channels, 5, 7}, -4.0, 4.0);
    const GdnParams<double> p{random_tensor(rng, {channels}, 1e-3, 4.0), Tensor<double>({channels, channels})};
    const Tensor<double> u = gdn_forward(w, p);
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t y = 0; y < 5; ++y)
          for (std::size_t x = 0; x < 7; ++x)
            worst = std::max(worst, std::abs(u.at(n, c, y, x) - w.at(n, c, y, x) / std::sqrt(p.beta[c])));
  }
  o.require(worst < 1e-12, "max abs diff " + fmt(worst));
  o.note("max abs diff " + fmt(worst, 3));
  return o;
}

Outcome binarizer() {
  Outcome o;
  const Tensor<double> pre({5}, {0.3, -0.7, 0.0, -1.0, 1.0});
  o.require(binarize(pre, BinarizeMode::kInferenceSign) == Tensor<double>({5}, {1, -1, 1, -1, 1}), "inference sign");
  Rng rng(3);
  for (double x : {-0.5, 0.0, 0.5}) {
    const Tensor<double> draws = binarize(Tensor<double>({100000}, x), BinarizeMode::kTrainStochastic, &rng);
    bool binary = true;
    for (double v : draws.values()) binary = binary && (v == 1.0 || v == -1.0);
    const double mean = reduce_sum(draws) / 1e5;
    o.require(binary, "stochastic output not +-1");
    o.require(std::abs(mean - x) <= 0.01, "mean at " + fmt(x) + " is " + fmt(mean));
    o.note("mean(" + fmt(x) + ")=" + fmt(mean, 4));
  }
  const Tensor<double> g = random_tensor(rng, {64}, -3, 3);
  o.require(binarize_backward(g) == g, "backward not identity");
  return o;
}

Outcome residual_loop() {
  Outcome o;
  const Tensor<float> image = testing::synthetic_image<float>(64, 48, 4);
  for (ReconstructionMode mode : {ReconstructionMode::kOneShot, ReconstructionMode::kAdditive}) {
    ArchitectureConfig config = ArchitectureConfig::desk();
    config.mode = mode;
    const CodecModel<float> model = build_model<float>(config, 4);
    const IterationTrace<float> trace = compress(model, image, 6, mode);
    const std::string m(to_string(mode));
    o.require(trace.residuals[0] == image, m + ": r_0 != x");
    bool zero = true;
    for (float v : trace.reconstructions[0].values()) zero = zero && v == 0.0f;
    o.require(zero, m + ": x_hat_0 != 0");
    for (std::size_t t = 1; t <= 6; ++t) {
      o.require(trace.residuals[t] == sub(image, trace.reconstructions[t]), m + ": r_t != x - x_hat_t");
      if (mode == ReconstructionMode::kAdditive) {
        const Tensor<float> expected = zip(trace.reconstructions[t - 1], trace.decoded[t - 1], "check",
                                           [](float p, float d) { return std::clamp(p + d, 0.0f, 1.0f); });
        o.require(trace.reconstructions[t] == expected, "additive recurrence broken at t=" + std::to_string(t));
      }
    }
    o.require(decompress<float>(model, trace.codes, mode) == trace.final_reconstruction(), m + ": decompress differs");
  }
  o.note("one_shot and additive, 6 iterations each");
  return o;
}

Outcome bitstream() {
  Outcome o;
  Rng rng(5);
  std::size_t exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const testing::RandomStream s = testing::random_stream(rng);
    const Bytes bytes = write_bitstream<float>(s.header, s.codes);
    const DecodedStream<float> back = read_bitstream<float>(bytes);
    if (back.header == s.header && back.codes == s.codes && write_bitstream<float>(back.header, back.codes) == bytes) {
      ++exact;
    }
  }
  o.require(exact == 1000, std::to_string(1000 - exact) + " round trips differ");
  BitstreamHeader h;
  h.width = h.height = h.padded_width = h.padded_height = 32;
  h.iterations = 1;
  h.code_channels = 32;
  const double bpp32 = bits_per_pixel(h);
  h.code_channels = 38;
  const double bpp38 = bits_per_pixel(h);
  o.require(bpp32 == 0.125, "bpp(32,1)=" + fmt(bpp32));
  o.require(bpp38 == 0.1484375, "bpp(38,1)=" + fmt(bpp38));

  // Encode then decode twice with the same model: byte-stable streams and
  // reconstructions.
  const CodecModel<float> model = build_model<float>(ArchitectureConfig::desk(), 6);
  const Tensor<float> image = testing::synthetic_image<float>(48, 64, 6);
  auto encode = [&] {
    const IterationTrace<float> trace = compress(model, image, 4, model.config.mode);
    BitstreamHeader header;
    header.width = header.padded_width = 64;
    header.height = header.padded_height = 48;
    header.iterations = 4;
    header.code_channels = 38;
    header.model_digest = model_digest(model);
    return write_bitstream<float>(header, trace.codes);
  };
  auto decode = [&](const Bytes& bytes) {
    const DecodedStream<float> s = read_bitstream<float>(bytes);
    return save_ppm(to_image(decompress<float>(model, s.codes, s.header.mode)));
  };
  const Bytes a = encode(), b = encode();
  o.require(a == b, "encode not byte-stable");
  o.require(decode(a) == decode(b), "decode not byte-stable");
  o.note("1000/1000 round trips exact, bpp(32,1)=" + fmt(bpp32) + ", bpp(38,1)=" + fmt(bpp38, 8));
  return o;
}

Outcome shape_contract() {
  Outcome o;
  const ArchitectureConfig config;
  const CodecModel<float> model = build_model<float>(config, 7);
  o.require(model.encoder.analysis.weight.shape() == Shape{64, 3, 3, 3}, "analysis " +
                                                                            to_string(model.encoder.analysis.weight.shape()));
  o.require(model.encoder.binarizer.weight.shape() == Shape{38, 512, 1, 1},
            "binarizer " + to_string(model.encoder.binarizer.weight.shape()));
  o.require(model.decoder.synthesis.weight.shape() == Shape{512, 38, 1, 1},
            "synthesis " + to_string(model.decoder.synthesis.weight.shape()));
  const IterationTrace<float> trace = compress(model, testing::synthetic_image<float>(32, 32, 7), 1, config.mode);
  o.require(trace.codes[0].shape() == Shape{1, 38, 2, 2}, "codes " + to_string(trace.codes[0].shape()));
  o.require(trace.final_reconstruction().shape() == Shape{1, 3, 32, 32},
            "reconstruction " + to_string(trace.final_reconstruction().shape()));
  o.note("codes " + to_string(trace.codes[0].shape()) + ", reconstruction " +
         to_string(trace.final_reconstruction().shape()) + ", " + std::to_string(parameter_count(model)) + " parameters");
  return o;
}

// Ten fixed patches cut from two synthetic scenes.
std::vector<Tensor<float>> training_patches() {
  const std::vector<Tensor<float>> scenes{testing::synthetic_image<float>(128, 128, 11),
                                          testing::synthetic_image<float>(96, 128, 12)};
  Rng rng(13);
  std::vector<Tensor<float>> patches;
  for (int k = 0; k < 10; ++k) patches.push_back(sample_patches<float>(scenes, 1, 32, rng));
  return patches;
}

Tensor<float> stack(const std::vector<Tensor<float>>& patches) {
  Tensor<float> batch({patches.size(), 3, 32, 32});
  for (std::size_t n = 0; n < patches.size(); ++n)
    std::copy(patches[n].values().begin(), patches[n].values().end(), batch.values().begin() + n * patches[n].size());
  return batch;
}

Outcome desk_training(DeskRun& run) {
  Outcome o;
  const std::vector<Tensor<float>> patches = training_patches();
  const Tensor<float> all = stack(patches);
  run.model = build_model<float>(ArchitectureConfig::desk(), 1);

  TrainConfig tc;
  tc.learning_rate = 0.0005;
  tc.batch_size = 16;
  tc.iterations = 4;
  tc.steps = 500;
  tc.seed = 1;

  const double before = evaluate_loss(run.model, all, 4);
  std::vector<double> losses;
  const auto start = Clock::now();
  train_model<float>(run.model, patches, tc, [&](std::size_t, double loss) { losses.push_back(loss); });
  const double elapsed = seconds_since(start);
  const double after = evaluate_loss(run.model, all, 4);
  run.trained = true;

  const double reduction = 1.0 - after / before;
  o.require(reduction >= 0.5, "loss reduction " + fmt(100 * reduction, 4) + "%");
  o.require(elapsed < 600.0, "runtime " + fmt(elapsed) + " s");
  o.note("mean L1 over the 10 patches " + fmt(before, 5) + " -> " + fmt(after, 5) + " (" +
         fmt(100 * reduction, 3) + "% lower); training loss step 1 " + fmt(losses.front(), 5) + ", step 500 " +
         fmt(losses.back(), 5) + "; " + fmt(elapsed, 4) + " s");
  return o;
}

Outcome variable_rate(const DeskRun& run) {
  Outcome o;
  o.require(run.trained, "training did not complete");
  if (!run.trained) return o;
  Rng rng(22);
  const std::vector<Tensor<float>> scene{testing::synthetic_image<float>(96, 96, 21)};
  const Tensor<float> held_out = sample_patches<float>(scene, 1, 32, rng);
  const std::vector<RdPoint> points = rd_points(run.model, held_out, 4, run.model.config.mode);
  o.require(points.back().ms_ssim >= points.front().ms_ssim,
            "MS-SSIM at T=4 " + fmt(points.back().ms_ssim) + " < T=1 " + fmt(points.front().ms_ssim));
  for (std::size_t k = 1; k < points.size(); ++k) o.require(points[k].bpp > points[k - 1].bpp, "bpp not increasing");
  std::string curve;
  for (const RdPoint& p : points) {
    curve += (curve.empty() ? "" : " ") + std::string("(") + fmt(p.bpp, 4) + " bpp, " + fmt(p.ms_ssim, 4) + ", " +
             fmt(p.psnr_db, 4) + " dB)";
  }
  o.note(curve);
  return o;
}

Outcome metric_sanity() {
  Outcome o;
  const auto [a, b] = testing::textured_pair();
  const auto [c, d] = testing::gradient_pair();
  o.require(psnr(a, a) == kPsnrCap, "psnr(a,a)=" + fmt(psnr(a, a)));
  const double self = ms_ssim(a, a);
  o.require(std::abs(self - 1.0) <= 1e-9, "ms_ssim(a,a)=" + fmt(self, 17));
  const double s64 = ssim(c, d), s256 = ssim(a, b), ms256 = ms_ssim(a, b);
  const double e1 = std::abs(s64 - testing::kSsimGradient64), e2 = std::abs(s256 - testing::kSsimTextured256),
               e3 = std::abs(ms256 - testing::kMsSsimTextured256);
  o.require(e1 <= 1e-4, "ssim 64x64 off by " + fmt(e1));
  o.require(e2 <= 1e-4, "ssim 256x256 off by " + fmt(e2));
  o.require(e3 <= 1e-4, "ms_ssim 256x256 off by " + fmt(e3));
  o.note("reference deltas ssim64 " + fmt(e1, 2) + ", ssim256 " + fmt(e2, 2) + ", ms_ssim256 " + fmt(e3, 2));
  return o;
}

std::string read_text(const fs::path& p) {
  const Bytes b = read_file(p);
  return std::string(b.begin(), b.end());
}

Outcome end_to_end_cli(const DeskRun& run) {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "grnc_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const CodecModel<float> model = run.trained ? run.model : build_model<float>(ArchitectureConfig::desk(), 1);
  write_file(dir / "model.grnm", save_checkpoint(model));
  const ImageBuffer input = testing::synthetic_buffer(512, 768, 31);
  write_file(dir / "kodak_like.ppm", save_ppm(input));

  const std::string tool = GRNC_TOOL_PATH;
  const std::string q = "\"";
  const int enc = std::system((q + tool + q + " encode " + q + (dir / "model.grnm").string() + q + " " + q +
                               (dir / "kodak_like.ppm").string() + q + " " + q + (dir / "image.grnb").string() + q +
                               " --iterations 8 > " + q + (dir / "encode.txt").string() + q)
                                  .c_str());
  o.require(enc == 0, "encode exit " + std::to_string(enc));
  const int dec = std::system((q + tool + q + " decode " + q + (dir / "model.grnm").string() + q + " " + q +
                               (dir / "image.grnb").string() + q + " " + q + (dir / "decoded.ppm").string() + q +
                               " > /dev/null")
                                  .c_str());
  o.require(dec == 0, "decode exit " + std::to_string(dec));
  if (enc != 0 || dec != 0) return o;

  const std::string printed = read_text(dir / "encode.txt");
  const double expected_bpp = 8.0 * static_cast<double>(model.config.code_channels) / 256.0;
  o.require(printed == "bpp " + fmt(expected_bpp, 10) + "\n", "printed '" + printed + "'");

  const PaddedTensor<float> padded = pad_to_multiple(to_tensor<float>(input));
  const IterationTrace<float> trace = compress(model, padded.tensor, 8, model.config.mode);
  const Bytes library = save_ppm(to_image(crop(trace.final_reconstruction(), padded.height, padded.width)));
  o.require(read_file(dir / "decoded.ppm") == library, "decoded PPM differs from library reconstruction");
  o.note("768x512, 8 iterations, printed '" + printed.substr(0, printed.size() - 1) + "', decoded PPM bit-exact");
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  DeskRun run;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient oracle suite", gradient_suite},
      {"GDN degenerate case", gdn_degenerate},
      {"binarizer", binarizer},
      {"residual-loop invariants", residual_loop},
      {"bitstream", bitstream},
      {"shape contract", shape_contract},
      {"desk-scale training trend", [&] { return desk_training(run); }},
      {"variable-rate trend", [&] { return variable_rate(run); }},
      {"metric sanity", metric_sanity},
      {"end-to-end CLI", [&] { return end_to_end_cli(run); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.passed) ++failures;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
              << "): " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
