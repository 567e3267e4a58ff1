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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "grnc/grnc.hpp"

namespace grnc::cli {
namespace {

namespace fs = std::filesystem;
using Model = CodecModel<float>;

int fail(std::ostream& err, const std::string& reason) {
  std::string line = reason;
  std::replace(line.begin(), line.end(), '\n', ' ');
  err << "error: " << line << '\n';
  return 1;
}

std::vector<fs::path> ppm_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Model load_model(const fs::path& path) { return load_checkpoint<float>(read_file(path)); }

std::string format_number(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("GRNC_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  try {
    RunConfig config;
    if (!args.config_file.empty()) {
      const Bytes text = read_file(args.config_file);
      config.apply_text(std::string(text.begin(), text.end()));
    }
    for (const std::string& o : args.overrides) config.apply_override(o);
    config.validate();

    std::vector<Tensor<float>> images;
    for (const fs::path& file : ppm_files(args.data_dir)) {
      try {
        const ImageBuffer img = load_ppm(read_file(file));
        if (img.width < config.train.patch_size || img.height < config.train.patch_size) {
          err << "warning: skipping " << file.filename().string() << ": smaller than patch size\n";
          continue;
        }
        images.push_back(to_tensor<float>(img));
      } catch (const Error& e) {
        err << "warning: skipping " << file.filename().string() << ": " << e.what() << '\n';
      }
    }
    if (images.empty()) return fail(err, "no training images in " + args.data_dir.string());

    const fs::path log_path = args.log.empty() ? fs::path(args.checkpoint.string() + ".log.csv") : args.log;
    std::ofstream log(log_path);
    if (!log) return fail(err, "cannot write " + log_path.string());
    const TrainConfig& tc = config.train;
    log << "# lr=" << format_number(tc.learning_rate) << " batch_size=" << tc.batch_size
        << " patch_size=" << tc.patch_size << " iterations=" << tc.iterations << " steps=" << tc.total_steps()
        << " seed=" << tc.seed << " code_channels=" << config.arch.code_channels
        << " mode=" << to_string(config.arch.mode) << " images=" << images.size() << '\n';
    log << "step,loss,seconds\n";

    Model model = build_model<float>(config.arch, tc.seed);
    const auto start = std::chrono::steady_clock::now();
    double last_loss = 0.0;
    train_model<float>(model, images, tc, [&](std::size_t step, double loss) {
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      log << step << ',' << format_number(loss, 9) << ',' << std::fixed << std::setprecision(3) << seconds
          << std::defaultfloat << '\n';
      last_loss = loss;
    });
    write_file(args.checkpoint, save_checkpoint(model));
    out << "final loss " << format_number(last_loss, 9) << '\n';
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int cmd_encode(const EncodeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Model model = load_model(args.checkpoint);
    const ImageBuffer img = load_ppm(read_file(args.input));
    const std::size_t iterations = args.iterations.value_or(model.config.iterations);
    const ReconstructionMode mode = args.mode.value_or(model.config.mode);
    if (iterations < 1 || iterations > 0xFFFF) return fail(err, "iterations must be in [1, 65535]");

    const PaddedTensor<float> padded = pad_to_multiple(to_tensor<float>(img), ArchitectureConfig::kDownsampling);
    const IterationTrace<float> trace = compress(model, padded.tensor, iterations, mode);

    BitstreamHeader header;
    header.width = static_cast<std::uint32_t>(img.width);
    header.height = static_cast<std::uint32_t>(img.height);
    header.padded_width = static_cast<std::uint32_t>(padded.tensor.dim(3));
    header.padded_height = static_cast<std::uint32_t>(padded.tensor.dim(2));
    header.iterations = static_cast<std::uint16_t>(iterations);
    header.code_channels = static_cast<std::uint16_t>(model.config.code_channels);
    header.mode = mode;
    header.model_digest = model_digest(model);
    write_file(args.output, write_bitstream<float>(header, trace.codes));
    out << "bpp " << format_number(bits_per_pixel(header)) << '\n';
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Model model = load_model(args.checkpoint);
    const DecodedStream<float> stream = read_bitstream<float>(read_file(args.input));
    const BitstreamHeader& h = stream.header;
    if (h.model_digest != model_digest(model)) {
      if (args.strict) return fail(err, "model digest does not match the stream header");
      err << "warning: model digest does not match the stream header\n";
    }
    if (h.code_channels != model.config.code_channels) {
      return fail(err, "stream has " + std::to_string(h.code_channels) + " code channels, model expects " +
                           std::to_string(model.config.code_channels));
    }
    const std::size_t k = args.iterations.value_or(h.iterations);
    if (k < 1 || k > h.iterations) {
      return fail(err, "requested " + std::to_string(k) + " iterations, stream holds " + std::to_string(h.iterations));
    }
    const Tensor<float> recon =
        decompress(model, std::span<const Tensor<float>>(stream.codes).first(k), h.mode);
    write_file(args.output, save_ppm(to_image(crop(recon, h.height, h.width))));
    out << "decoded " << k << " of " << h.iterations << " iterations, " << h.width << "x" << h.height << '\n';
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Model model = load_model(args.checkpoint);
    if (args.max_iterations < 1) return fail(err, "max-iterations must be >= 1");
    const std::vector<fs::path> files = ppm_files(args.image_dir);
    if (files.empty()) return fail(err, "no images in " + args.image_dir.string());

    std::vector<std::vector<RdPoint>> results(files.size());
    std::vector<std::string> failures(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < files.size(); i = next++) {
        try {
          const Tensor<float> image = to_tensor<float>(load_ppm(read_file(files[i])));
          results[i] = rd_points(model, image, args.max_iterations, model.config.mode);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    };
    const std::size_t threads = std::min(worker_count(), files.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ofstream csv(args.csv);
    if (!csv) return fail(err, "cannot write " + args.csv.string());
    csv << "image,iteration,bpp,psnr_db,ms_ssim\n";
    std::size_t skipped = 0, rows = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (!failures[i].empty()) {
        err << "warning: skipping " << files[i].filename().string() << ": " << failures[i] << '\n';
        ++skipped;
        continue;
      }
      for (const RdPoint& p : results[i]) {
        csv << files[i].filename().string() << ',' << p.iteration << ',' << format_number(p.bpp) << ','
            << format_number(p.psnr_db, 8) << ',' << format_number(p.ms_ssim, 8) << '\n';
        ++rows;
      }
    }
    out << "wrote " << rows << " rows for " << files.size() - skipped << " images\n";
    if (skipped > 0 && args.strict) return fail(err, std::to_string(skipped) + " images skipped");
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out, std::ostream& err) {
  try {
    GradcheckOptions options;
    options.seed = args.seed;
    options.tolerance = args.tolerance;
    options.seeds = args.seeds;
    options.fault = args.fault;
    std::string failed;
    for (const GradcheckReport& r : run_gradient_checks(options)) {
      out << std::left << std::setw(22) << r.op << " max_rel_err=" << std::scientific << std::setprecision(3)
          << r.max_error << std::defaultfloat << " seeds=" << r.seeds << ' ' << (r.passed ? "PASS" : "FAIL") << '\n';
      if (!r.passed) failed += (failed.empty() ? "" : ",") + r.op;
    }
    if (!failed.empty()) return fail(err, "gradient check failed: " + failed);
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recurrent GDN image codec"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on the PPM images of a directory");
  train_cmd->add_option("--config", train.config_file, "key=value config file");
  train_cmd->add_option("--set", train.overrides, "Config override key=value (repeatable)");
  train_cmd->add_option("data_dir", train.data_dir)->required();
  train_cmd->add_option("checkpoint", train.checkpoint)->required();
  train_cmd->add_option("--log", train.log, "CSV training log (default <checkpoint>.log.csv)");

  EncodeArgs encode;
  std::string encode_mode;
  auto* encode_cmd = app.add_subcommand("encode", "Compress a PPM image into a GRNB stream");
  encode_cmd->add_option("checkpoint", encode.checkpoint)->required();
  encode_cmd->add_option("image", encode.input)->required();
  encode_cmd->add_option("stream", encode.output)->required();
  encode_cmd->add_option("--iterations", encode.iterations);
  encode_cmd->add_option("--mode", encode_mode)->check(CLI::IsMember({"one_shot", "additive"}));

  DecodeArgs decode;
  auto* decode_cmd = app.add_subcommand("decode", "Reconstruct a PPM image from a GRNB stream");
  decode_cmd->add_option("checkpoint", decode.checkpoint)->required();
  decode_cmd->add_option("stream", decode.input)->required();
  decode_cmd->add_option("image", decode.output)->required();
  decode_cmd->add_option("--iterations", decode.iterations, "Decode only the first k iterations");
  decode_cmd->add_flag("--strict", decode.strict, "Fail when the model digest differs from the stream");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Write rate-distortion CSV rows for a directory of PPM images");
  eval_cmd->add_option("checkpoint", eval.checkpoint)->required();
  eval_cmd->add_option("image_dir", eval.image_dir)->required();
  eval_cmd->add_option("csv", eval.csv)->required();
  eval_cmd->add_option("--max-iterations", eval.max_iterations);
  eval_cmd->add_flag("--strict", eval.strict, "Exit non-zero when any image is skipped");

  GradcheckArgs gradcheck;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Check every backward pass against finite differences");
  gradcheck_cmd->add_option("--seed", gradcheck.seed);
  gradcheck_cmd->add_option("--tolerance", gradcheck.tolerance);
  gradcheck_cmd->add_option("--seeds", gradcheck.seeds);
  gradcheck_cmd->add_option("--inject-fault", gradcheck.fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, e.what());
  }

  if (*train_cmd) return cmd_train(train, out, err);
  if (*encode_cmd) {
    if (!encode_mode.empty()) {
      encode.mode = encode_mode == "additive" ? ReconstructionMode::kAdditive : ReconstructionMode::kOneShot;
    }
    return cmd_encode(encode, out, err);
  }
  if (*decode_cmd) return cmd_decode(decode, out, err);
  if (*eval_cmd) return cmd_eval(eval, out, err);
  return cmd_gradcheck(gradcheck, out, err);
}

}  // namespace grnc::cli
