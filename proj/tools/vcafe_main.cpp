// Copyright 2026 The vcafe-avsr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vcafe: data generation, training, SNR-sweep evaluation, gradient checks
// and decoding for the V-CAFE audio-visual recognizer.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avsr/config.hpp"
#include "avsr/error.hpp"
#include "avsr/experiment.hpp"
#include "avsr/io.hpp"
#include "avsr/sample_io.hpp"

namespace fs = std::filesystem;
using namespace avsr;

namespace {

constexpr const char* kOutputEnv = "VCAFE_OUTPUT_DIR";
constexpr int kUsageExit = 2;
constexpr int kInternalExit = 1;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> epochs;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.overrides, "Override a config key, e.g. --set train.lr=5e-4");
  cmd->add_option("-o,--out", c.out_dir, std::string("Output directory (default $") + kOutputEnv +
                                             " or ./vcafe_out)");
  cmd->add_option("--seed", c.seed, "Root seed");
  cmd->add_option("--mode", c.mode, "asr | vsr | avsr_baseline | avsr_vcafe");
  cmd->add_option("--epochs", c.epochs, "Training epochs");
}

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig config = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  finalize(config);
  if (c.seed) apply_override(config, "seed=" + std::to_string(*c.seed));
  if (c.mode) apply_override(config, "model.mode=\"" + *c.mode + "\"");
  if (c.epochs) apply_override(config, "train.epochs=" + std::to_string(*c.epochs));
  for (const auto& o : c.overrides) apply_override(config, o);
  return config;
}

fs::path output_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return "vcafe_out";
}

std::vector<double> parse_snrs(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    if (s == "clean") {
      out.push_back(kCleanSnr);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || std::isnan(v)) throw ConfigError("bad SNR value '" + s + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_gen_data(const Common& common, std::optional<std::size_t> num_samples,
                 const std::vector<std::string>& snr, const std::string& noise_kind, bool overlap) {
  ExperimentConfig config = resolve_config(common);
  if (num_samples) apply_override(config, "data.train_samples=" + std::to_string(*num_samples));
  Dataset data = make_dataset(config);
  const std::vector<double> snrs = parse_snrs(snr);
  NoiseKind kind = parse_noise_kind(noise_kind);
  if (overlap) kind = NoiseKind::kOverlap;
  if (snrs.size() > 1) throw ConfigError("gen-data takes a single --snr");
  if (!snrs.empty() && kind != NoiseKind::kClean) {
    data.train = corrupt_split(data.train, kind, snrs[0], "gen.train", data, config);
    data.val = corrupt_split(data.val, kind, snrs[0], "gen.val", data, config);
    data.test = corrupt_split(data.test, kind, snrs[0], "gen.test", data, config);
  } else if (kind != NoiseKind::kClean) {
    throw ConfigError("--noise-kind needs --snr");
  }
  const fs::path dir = output_dir(common) / "data";
  write_dataset(dir, data, config);
  std::cout << "wrote " << data.train.size() << "/" << data.val.size() << "/" << data.test.size()
            << " train/val/test samples to " << dir.string() << "\n";
  return 0;
}

int cmd_train(const Common& common, const std::string& checkpoint_name) {
  const ExperimentConfig config = resolve_config(common);
  const Dataset data = make_dataset(config);
  const fs::path out = output_dir(common);
  std::cout << "training " << mode_name(config.model.mode) << " on " << data.train.size()
            << " samples for " << config.train.epochs << " epochs\n";
  TrainedModel trained = train(config, data, [](const EpochLog& e) {
    std::printf("epoch %3zu  train %.4f  val %.4f  (%.1fs)\n", e.epoch, e.train_loss, e.val_loss,
                e.seconds);
    std::fflush(stdout);
  });
  const fs::path ckpt = out / checkpoint_name;
  save_trained(ckpt, trained);
  atomic_write(out / "train_log.csv", training_log_csv(trained.log));
  atomic_write(out / "config.json", config_to_json(config) + "\n");
  std::cout << "checkpoint: " << ckpt.string() << "\n";
  return 0;
}

int cmd_eval_sweep(const Common& common, const std::string& checkpoint,
                   const std::vector<std::string>& noise, const std::vector<std::string>& snr,
                   std::optional<std::size_t> mask_samples, std::optional<std::size_t> threads) {
  TrainedModel trained = load_trained(checkpoint);
  ExperimentConfig config = trained.config;
  // Data location, decode and eval settings may differ from training time.
  Common eval_common = common;
  eval_common.mode.reset();
  eval_common.seed.reset();
  if (!common.config_path.empty() || !common.overrides.empty()) {
    ExperimentConfig fresh = resolve_config(eval_common);
    config.decode = fresh.decode;
    config.eval = fresh.eval;
    config.data.dir = fresh.data.dir;
  }
  if (!noise.empty()) {
    config.eval.noise.clear();
    for (const auto& n : noise) config.eval.noise.push_back(parse_noise_kind(n));
  }
  if (!snr.empty()) config.eval.snr_db = parse_snrs(snr);
  if (threads) config.eval.threads = *threads;
  const Dataset data = make_dataset(config);
  const ResultTable table = evaluate_sweep(*trained.model, trained.lm, data, config);
  const fs::path out = output_dir(common);
  atomic_write(out / "results.csv", table.to_csv());
  atomic_write(out / "results.json", table.to_json());
  atomic_write(out / "results.txt", table.to_text());
  atomic_write(out / "wer_vs_snr.csv", table.series_csv());
  if (mask_samples && trained.model->mode() == Mode::kAvsrVcafe) {
    const std::size_t n = std::min(*mask_samples, data.test.size());
    for (std::size_t i = 0; i < n; ++i) {
      atomic_write(out / ("mask_" + data.test[i].id + ".csv"),
                   mask_csv(trained.model->mask(data.test[i])));
    }
  }
  std::cout << table.to_text();
  return 0;
}

int cmd_gradcheck(const std::optional<std::string>& mode, double tolerance, bool zero_loss) {
  std::vector<Mode> modes;
  if (mode) {
    modes.push_back(parse_mode(*mode));
  } else {
    modes = {Mode::kAsr, Mode::kVsr, Mode::kAvsrBaseline, Mode::kAvsrVcafe};
  }
  bool ok = true;
  for (Mode m : modes) {
    GradCheckConfig gc;
    gc.mode = m;
    gc.tolerance = tolerance;
    gc.zero_loss = zero_loss;
    const GradCheckSummary s = run_gradcheck(gc);
    std::printf("mode %s\n", std::string(mode_name(m)).c_str());
    for (const auto& g : s.groups) {
      std::printf("  %-22s %-4s max_rel_err %.3e  (%zu entries, worst %s)\n", g.group.c_str(),
                  g.max_rel_error < tolerance ? "ok" : "FAIL", g.max_rel_error, g.entries,
                  g.worst_param.c_str());
    }
    if (!s.passed) {
      ok = false;
      std::string groups;
      for (const auto& f : s.failing) groups += (groups.empty() ? "" : ", ") + f;
      std::fprintf(stderr, "gradient check failed for %s: %s\n",
                   std::string(mode_name(m)).c_str(), groups.c_str());
    }
  }
  return ok ? 0 : static_cast<int>(ErrorCategory::kGradCheck);
}

int cmd_decode(const Common& common, const std::string& checkpoint, const std::string& input,
               const std::string& output, const std::vector<std::string>& snr,
               const std::string& noise_kind) {
  TrainedModel trained = load_trained(checkpoint);
  ExperimentConfig config = trained.config;
  const Dataset data = make_dataset(config);
  std::vector<AVSample> samples = input.empty() ? data.test : read_samples(input, data.vocab);
  const std::vector<double> snrs = parse_snrs(snr);
  const NoiseKind kind = parse_noise_kind(noise_kind);
  if (snrs.size() > 1) throw ConfigError("decode takes a single --snr");
  if (!snrs.empty() && kind != NoiseKind::kClean) {
    samples = corrupt_split(samples, kind, snrs[0], "eval", data, config);
  }
  const auto decoded = decode_samples(*trained.model, trained.lm, samples, data.vocab,
                                      config.decode, config.eval.threads);
  const std::string text = decode_jsonl(decoded, data.vocab);
  if (output.empty()) {
    std::cout << text;
  } else {
    atomic_write(output_dir(common) / output, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"V-CAFE audio-visual speech recognition toolkit"};
  app.require_subcommand(1);

  Common common;

  auto* gen = app.add_subcommand("gen-data", "Generate synthetic train/val/test splits");
  add_common(gen, common);
  std::optional<std::size_t> num_samples;
  std::vector<std::string> gen_snr;
  std::string gen_noise = "clean";
  bool overlap = false;
  gen->add_option("--num-samples", num_samples, "Training samples");
  gen->add_option("--snr", gen_snr, "Corrupt every split at this SNR (dB)");
  gen->add_option("--noise-kind", gen_noise, "clean | gaussian | babble | overlap");
  gen->add_flag("--overlap", overlap, "Overlap a competing utterance (same as --noise-kind overlap)");

  auto* tr = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common(tr, common);
  std::string checkpoint_name = "checkpoint.txt";
  tr->add_option("--checkpoint-name", checkpoint_name, "Checkpoint file name in the output dir");

  auto* ev = app.add_subcommand("eval-sweep", "Evaluate a checkpoint across noise kinds and SNRs");
  add_common(ev, common);
  std::string checkpoint;
  std::vector<std::string> ev_noise, ev_snr;
  std::optional<std::size_t> mask_samples, threads;
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  ev->add_option("--noise", ev_noise, "Noise kinds");
  ev->add_option("--snr", ev_snr, "SNR list in dB ('clean' allowed)");
  ev->add_option("--dump-masks", mask_samples, "Write V-CAFE masks of the first N test samples");
  ev->add_option("--threads", threads, "Decoding threads (0 = all cores)");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  std::optional<std::string> gc_mode;
  double tolerance = 1e-4;
  bool zero_loss = false;
  gc->add_option("--mode", gc_mode, "Only this mode (default: all four)");
  gc->add_option("--tolerance", tolerance, "Maximum relative error");
  gc->add_flag("--zero-loss", zero_loss, "Check the degenerate zero-loss configuration");

  auto* dec = app.add_subcommand("decode", "Decode samples to JSON lines");
  add_common(dec, common);
  std::string dec_ckpt, dec_input, dec_output;
  std::vector<std::string> dec_snr;
  std::string dec_noise = "clean";
  dec->add_option("--checkpoint", dec_ckpt, "Checkpoint file")->required();
  dec->add_option("--input", dec_input, "Sample .jsonl file (default: generated test split)");
  dec->add_option("--output", dec_output, "Output file in the output dir (default: stdout)");
  dec->add_option("--snr", dec_snr, "Corrupt inputs at this SNR");
  dec->add_option("--noise-kind", dec_noise, "Noise kind used with --snr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, num_samples, gen_snr, gen_noise, overlap);
    if (tr->parsed()) return cmd_train(common, checkpoint_name);
    if (ev->parsed()) {
      return cmd_eval_sweep(common, checkpoint, ev_noise, ev_snr, mask_samples, threads);
    }
    if (gc->parsed()) return cmd_gradcheck(gc_mode, tolerance, zero_loss);
    if (dec->parsed()) {
      return cmd_decode(common, dec_ckpt, dec_input, dec_output, dec_snr, dec_noise);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternalExit;
  }
  return kInternalExit;
}
