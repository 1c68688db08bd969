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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "avsr/ctc.hpp"
#include "avsr/experiment.hpp"
#include "avsr/io.hpp"
#include "avsr/ops.hpp"
#include "avsr/vcafe.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace avsr;
using avsr::testing::probe_loss;
using avsr::testing::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path output_root() {
  if (const char* env = std::getenv("VCAFE_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fs::current_path() / "acceptance_output";
}

// ---------------------------------------------------------------------------

struct OpCase {
  const char* name;
  std::vector<Tensor> inputs;
  InputLoss loss;
};

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  std::uint64_t s = 1000;
  auto r = [&](Shape shape) { return random_tensor(std::move(shape), ++s); };
  static const std::vector<std::size_t> ids{2, 0, 1, 2};
  static const std::vector<std::size_t> targets{1, 3, 0};
  static const std::vector<std::size_t> ctc_labels{1, 2, 2};
  cases.push_back({"matmul", {r({3, 4}), r({4, 2})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, matmul(in[0], in[1])); }});
  cases.push_back({"matmul_batched", {r({2, 3, 4}), r({4, 2})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, matmul(in[0], in[1])); }});
  cases.push_back({"transpose", {r({3, 5})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, transpose(in[0])); }});
  cases.push_back({"add_sub", {r({3, 4}), r({3, 4})}, [](Graph& g, std::span<const Var> in) {
                     return probe_loss(g, sub(add(in[0], in[1]), scale(in[1], 0.3)));
                   }});
  cases.push_back({"mul", {r({3, 4}), r({3, 4})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, mul(in[0], in[1])); }});
  cases.push_back({"row_broadcast", {r({3, 4}), r({4}), r({4})}, [](Graph& g, std::span<const Var> in) {
                     return probe_loss(g, add_row(mul_row(in[0], in[1]), in[2]));
                   }});
  cases.push_back({"relu", {r({4, 5})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, relu(in[0])); }});
  cases.push_back({"sigmoid", {r({4, 5})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, sigmoid(in[0])); }});
  cases.push_back({"swish", {r({4, 5})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, swish(in[0])); }});
  cases.push_back({"softmax", {r({3, 5})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, softmax(in[0], 1)); }});
  cases.push_back({"log_softmax", {r({3, 5})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, log_softmax(in[0], 0)); }});
  cases.push_back({"layernorm", {r({3, 6})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, layernorm(in[0], 1)); }});
  cases.push_back({"conv1d", {r({7, 3}), r({3, 3, 4})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, conv1d(in[0], in[1], 1, 1)); }});
  cases.push_back({"conv1d_stride2", {r({8, 3}), r({3, 3, 2})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, conv1d(in[0], in[1], 2, 1)); }});
  cases.push_back({"depthwise_conv1d", {r({6, 4}), r({5, 4})}, [](Graph& g, std::span<const Var> in) {
                     return probe_loss(g, depthwise_conv1d(in[0], in[1]));
                   }});
  cases.push_back({"concat_slice", {r({3, 2}), r({3, 4})}, [](Graph& g, std::span<const Var> in) {
                     return probe_loss(g, slice(concat(in[0], in[1], 1), 1, 1, 5));
                   }});
  cases.push_back({"embedding", {r({3, 4})},
                   [](Graph& g, std::span<const Var> in) { return probe_loss(g, embedding(in[0], ids)); }});
  cases.push_back({"causal_softmax", {r({4, 4})}, [](Graph& g, std::span<const Var> in) {
                     return probe_loss(g, softmax(causal_mask(in[0]), 1));
                   }});
  cases.push_back({"sum_mean", {r({3, 4})}, [](Graph&, std::span<const Var> in) {
                     return add(sum(mul(in[0], in[0])), mean(in[0]));
                   }});
  cases.push_back({"cross_entropy", {r({3, 4})},
                   [](Graph&, std::span<const Var> in) { return cross_entropy(in[0], targets); }});
  cases.push_back({"ctc_loss", {r({6, 4})},
                   [](Graph&, std::span<const Var> in) { return ctc_loss(in[0], ctc_labels); }});
  cases.push_back({"enhance", {r({4, 5}), r({4, 5})}, [](Graph& g, std::span<const Var> in) {
                     return probe_loss(g, enhance(in[0], sigmoid(in[1])));
                   }});
  return cases;
}

Outcome criterion_gradients() {
  const auto start = Clock::now();
  double worst_op = 0.0;
  std::string worst_name;
  for (auto& c : op_cases()) {
    const double e = check_input_gradients(c.inputs, c.loss);
    if (e > worst_op) worst_op = e, worst_name = c.name;
  }
  double worst_model = 0.0;
  std::string worst_group;
  for (Mode m : {Mode::kAsr, Mode::kVsr, Mode::kAvsrBaseline, Mode::kAvsrVcafe}) {
    GradCheckConfig gc;
    gc.mode = m;
    for (const auto& g : run_gradcheck(gc).groups) {
      if (g.max_rel_error > worst_model) {
        worst_model = g.max_rel_error;
        worst_group = std::string(mode_name(m)) + "/" + g.group;
      }
    }
  }
  const double secs = elapsed(start);
  Outcome o;
  o.pass = worst_op < 1e-5 && worst_model < 1e-4 && secs < 120.0;
  o.detail = "per-op max rel err " + fmt("%.2e", worst_op) + " (" + worst_name +
             ", < 1e-5); end-to-end max " + fmt("%.2e", worst_model) + " (" + worst_group +
             ", < 1e-4); " + fmt("%.1f", secs) + " s (< 120 s)";
  return o;
}

Outcome criterion_ctc_oracle() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t instances = 0;
  std::uint64_t seed = 5000;
  for (std::size_t T = 1; T <= 6; ++T) {
    for (std::size_t V = 2; V <= 4; ++V) {
      std::vector<std::size_t> symbols;
      for (std::size_t v = 1; v < V; ++v) symbols.push_back(v);
      const auto labelings = oracle::all_sequences(symbols, 3);
      for (int draw = 0; draw < 3; ++draw) {
        Graph g;
        const Tensor lp = log_softmax(g.constant(random_tensor({T, V}, ++seed, 2.0)), 1).value();
        for (const auto& y : labelings) {
          if (ctc_min_frames(y) > T) continue;
          worst = std::max(worst, std::abs(ctc_log_likelihood(lp, y) - oracle::ctc_brute_force(lp, y)));
          ++instances;
        }
      }
    }
  }
  const double secs = elapsed(start);
  return {worst < 1e-9 && secs < 60.0,
          std::to_string(instances) + " instances, max |DP - brute force| " + fmt("%.2e", worst) +
              " (< 1e-9); " + fmt("%.1f", secs) + " s (< 60 s)"};
}

Outcome criterion_enhance_identities() {
  bool zero_ok = true, one_ok = true, range_ok = true;
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Graph g;
    g.set_grad_enabled(false);
    const Tensor f = random_tensor({6, 8}, s, std::pow(10.0, static_cast<double>(s % 7) - 3.0));
    const Tensor out0 = enhance(g.constant(f), g.constant(Tensor(f.shape(), 0.0))).value();
    const Tensor out1 = enhance(g.constant(f), g.constant(Tensor(f.shape(), 1.0))).value();
    zero_ok = zero_ok && out0 == f;
    for (std::size_t i = 0; i < f.numel(); ++i) one_ok = one_ok && out1[i] == 2.0 * f[i];
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    ParamStore store;
    Rng rng(s);
    VCafeConfig vc{.d1 = 8, .d2 = 4};
    VCafeParams p = VCafeParams::create(store, vc, rng);
    Graph g;
    g.set_grad_enabled(false);
    const double amp = 0.1 * static_cast<double>(1 + s % 30);
    const Tensor m = vcafe_forward(g, g.constant(random_tensor({7, 8}, 2 * s, amp)),
                                   g.constant(random_tensor({7, 8}, 2 * s + 1, amp)), store, p)
                         .mask.value();
    for (double v : m.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      range_ok = range_ok && v > 0.0 && v < 1.0;
    }
  }
  return {zero_ok && one_ok && range_ok,
          std::string("enhance(f,0)==f ") + (zero_ok ? "exact" : "VIOLATED") + ", enhance(f,1)==2f " +
              (one_ok ? "exact" : "VIOLATED") + ", masks in [" + fmt("%.3g", lo) + ", " +
              fmt("%.3g", hi) + "] over 100 random models"};
}

Outcome criterion_beam_oracle() {
  std::size_t mismatches = 0, instances = 0;
  for (std::size_t content = 1; content <= 3; ++content) {
    std::vector<std::string> symbols;
    for (std::size_t i = 0; i < content; ++i) symbols.push_back(std::string(1, static_cast<char>('a' + i)));
    const Vocab vocab(symbols);
    std::vector<std::vector<std::size_t>> corpus;
    for (std::size_t i = 0; i < content; ++i) corpus.push_back({3 + i, 3 + (i + 1) % content});
    const BigramLM lm = BigramLM::train(corpus, vocab);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      const std::size_t T = 1 + seed % 4;
      Graph g;
      const Tensor ctc =
          log_softmax(g.constant(random_tensor({T, vocab.size()}, 7000 + seed, 2.0)), 1).value();
      // Independent random next-token distribution for each prefix.
      auto table = std::make_shared<std::map<std::vector<std::size_t>, std::vector<double>>>();
      NextTokenScorer att = [&, table, seed](std::span<const std::size_t> prefix) {
        std::vector<std::size_t> key(prefix.begin(), prefix.end());
        if (auto it = table->find(key); it != table->end()) return it->second;
        std::uint64_t h = 9000 + seed;
        for (std::size_t t : key) h = h * 1000003u + t + 1;
        Graph sg;
        const Tensor lp = log_softmax(sg.constant(random_tensor({vocab.size()}, h, 1.5)), 0).value();
        std::vector<double> out(lp.data().begin(), lp.data().end());
        (*table)[key] = out;
        return out;
      };
      const double alpha = seed % 3 == 0 ? 0.3 : static_cast<double>(seed % 11) / 10.0;
      const double beta = seed % 3 == 0 ? 0.1 : static_cast<double>(seed % 5) / 4.0;
      const DecodeConfig config{.ctc_weight = alpha, .lm_weight = beta, .beam_width = 64, .max_length = 2};
      const BeamResult result = beam_search(ctc, att, &lm, vocab, config);
      const auto best = oracle::exhaustive_decode(ctc, att, &lm, vocab, config, 2);
      ++instances;
      if (result.best.tokens != best.tokens || std::abs(result.best.score - best.score) > 1e-9) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(instances) + " toy instances (|V| <= 3, length <= 2), " +
                               std::to_string(mismatches) + " differ from the exhaustive argmax"};
}

Outcome criterion_snr_calibration() {
  ExperimentConfig c;
  finalize(c);
  const PhonemeAlphabet a = make_alphabet(c);
  double worst = 0.0;
  std::size_t mixes = 0;
  const std::vector<AVSample> pool = generate_split(a, Split::kTest, 1000, {}, 77);
  for (NoiseKind kind : {NoiseKind::kGaussian, NoiseKind::kBabble, NoiseKind::kOverlap}) {
    for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const AVSample& s = pool[i];
        const AVSample& other = pool[(i + 1) % pool.size()];
        const AVSample mixed = corrupt_sample(s, {kind, snr, 31 * i + 7}, a, &other);
        Tensor noise = mixed.audio.spectro;
        noise.add_inplace(s.audio.spectro, -1.0);
        worst = std::max(worst, std::abs(measured_snr_db(s.audio.spectro, noise) - snr));
        ++mixes;
      }
    }
  }
  return {worst < 0.01, std::to_string(mixes) + " mixes (gaussian, babble, overlap at -5..15 dB), max |measured - target| " +
                            fmt("%.2e", worst) + " dB (< 0.01)"};
}

// ---------------------------------------------------------------------------

const std::vector<std::uint64_t> kSeeds{1, 2, 3};
const std::vector<double> kSweep{-5.0, 0.0, 5.0, 10.0, 15.0};

struct Experiments {
  ResultTable babble;   // all four modes, every seed ("mode#seed" rows)
  ResultTable overlap;  // baseline and V-CAFE
  std::size_t train_samples = 0;
  double minutes = 0.0;
};

std::string seeded(Mode m, std::uint64_t seed) {
  return std::string(mode_name(m)) + "#" + std::to_string(seed);
}

void run_experiments(Experiments& out) {
  const auto start = Clock::now();
  const fs::path dir = output_root();
  for (std::uint64_t seed : kSeeds) {
    const auto seed_start = Clock::now();
    ExperimentConfig base;
    base.seed = seed;
    base.eval.snr_db = kSweep;
    finalize(base);
    out.train_samples = base.data.train_samples;
    const Dataset data = make_dataset(base);
    for (NoiseKind noise : {NoiseKind::kBabble, NoiseKind::kOverlap}) {
      std::vector<Mode> modes{Mode::kAvsrBaseline, Mode::kAvsrVcafe};
      if (noise == NoiseKind::kBabble) modes = {Mode::kAsr, Mode::kVsr, Mode::kAvsrBaseline, Mode::kAvsrVcafe};
      for (Mode m : modes) {
        ExperimentConfig c = base;
        c.model.mode = m;
        c.train.noise = noise;
        c.eval.noise = {noise};
        finalize(c);
        std::fprintf(stderr, "  seed %llu  %-13s %-7s training...", static_cast<unsigned long long>(seed),
                     std::string(mode_name(m)).c_str(), std::string(noise_kind_name(noise)).c_str());
        std::fflush(stderr);
        const auto t0 = Clock::now();
        TrainedModel trained = train(c, data);
        const ResultTable table = evaluate_sweep(*trained.model, trained.lm, data, c);
        const std::string tag = std::string(noise_kind_name(noise)) + "_" + std::string(mode_name(m)) +
                                "_seed" + std::to_string(seed);
        atomic_write(dir / (tag + "_log.csv"), training_log_csv(trained.log));
        atomic_write(dir / (tag + "_results.csv"), table.to_csv());
        std::fprintf(stderr, " val loss %.3f -> %.3f, WER@-5 %.2f%%, %.0f s\n", trained.log.front().val_loss,
                     trained.log.back().val_loss, table.rows().front().wer, elapsed(t0));
        for (ResultRow row : table.rows()) {
          row.mode = seeded(m, seed);
          (noise == NoiseKind::kBabble ? out.babble : out.overlap).add(row);
        }
      }
    }
    std::fprintf(stderr, "  seed %llu done in %.1f min\n", static_cast<unsigned long long>(seed),
                 elapsed(seed_start) / 60.0);
  }
  out.minutes = elapsed(start) / 60.0;
  atomic_write(dir / "babble_all_seeds.csv", out.babble.to_csv());
  atomic_write(dir / "overlap_all_seeds.csv", out.overlap.to_csv());
}

double mean_wer(const ResultTable& t, Mode m, const std::string& noise, double snr) {
  double total = 0.0;
  for (std::uint64_t seed : kSeeds) total += t.wer(seeded(m, seed), noise, snr);
  return total / static_cast<double>(kSeeds.size());
}

std::string mean_table(const ResultTable& t, const std::vector<Mode>& modes, const std::string& noise) {
  ResultTable mean;
  for (Mode m : modes)
    for (double snr : kSweep) mean.add({std::string(mode_name(m)), noise, snr, mean_wer(t, m, noise, snr), 0.0, 0, 0.0});
  return mean.to_text();
}

Outcome criterion_babble_gap(const Experiments& e) {
  const auto base = [&](double s) { return mean_wer(e.babble, Mode::kAvsrBaseline, "babble", s); };
  const auto vcafe = [&](double s) { return mean_wer(e.babble, Mode::kAvsrVcafe, "babble", s); };
  const double gap_m5 = base(-5) - vcafe(-5), gap_0 = base(0) - vcafe(0), gap_15 = base(15) - vcafe(15);
  const bool pass = e.train_samples >= 2000 && vcafe(-5) < base(-5) && vcafe(0) < base(0) && gap_m5 > gap_15;
  return {pass, "mean WER over 3 seeds, baseline vs V-CAFE: -5 dB " + fmt("%.2f", base(-5)) + " vs " +
                    fmt("%.2f", vcafe(-5)) + ", 0 dB " + fmt("%.2f", base(0)) + " vs " + fmt("%.2f", vcafe(0)) +
                    "; gap -5 dB " + fmt("%.2f", gap_m5) + " > gap 15 dB " + fmt("%.2f", gap_15) + " (gap 0 dB " +
                    fmt("%.2f", gap_0) + "); " + std::to_string(e.train_samples) + " train samples, " +
                    fmt("%.1f", e.minutes / static_cast<double>(kSeeds.size())) + " min per seed"};
}

Outcome criterion_modality_order(const Experiments& e) {
  const double asr = mean_wer(e.babble, Mode::kAsr, "babble", -5);
  const double vsr = mean_wer(e.babble, Mode::kVsr, "babble", -5);
  const double vcafe = mean_wer(e.babble, Mode::kAvsrVcafe, "babble", -5);
  return {asr > vsr && vcafe < vsr, "mean WER at -5 dB babble: asr " + fmt("%.2f", asr) + " > vsr " +
                                        fmt("%.2f", vsr) + " > avsr_vcafe " + fmt("%.2f", vcafe)};
}

Outcome criterion_overlap(const Experiments& e) {
  const auto base = [&](double s) { return mean_wer(e.overlap, Mode::kAvsrBaseline, "overlap", s); };
  const auto vcafe = [&](double s) { return mean_wer(e.overlap, Mode::kAvsrVcafe, "overlap", s); };
  return {vcafe(-5) <= base(-5) && vcafe(0) <= base(0),
          "mean WER over 3 seeds with overlap training and evaluation, baseline vs V-CAFE: -5 dB " +
              fmt("%.2f", base(-5)) + " vs " + fmt("%.2f", vcafe(-5)) + ", 0 dB " + fmt("%.2f", base(0)) +
              " vs " + fmt("%.2f", vcafe(0))};
}

Outcome criterion_determinism() {
  ExperimentConfig c;
  c.seed = 11;
  c.data.train_samples = 120;
  c.data.val_samples = 20;
  c.data.test_samples = 20;
  c.train.epochs = 2;
  c.eval.snr_db = kSweep;
  finalize(c);
  auto run = [&](std::size_t threads) {
    const Dataset data = make_dataset(c);
    TrainedModel t = train(c, data);
    ExperimentConfig ec = c;
    ec.eval.threads = threads;
    return std::make_pair(serialize_checkpoint(t.config, t.model->params(), t.lm),
                          evaluate_sweep(*t.model, t.lm, data, ec));
  };
  const auto a = run(1);
  const auto b = run(4);
  const bool ckpt = a.first == b.first;
  const bool table = a.second.same_results(b.second) && a.second.series_csv() == b.second.series_csv();
  return {ckpt && table, std::string("checkpoints ") + (ckpt ? "bit-identical" : "DIFFER") + " (" +
                             std::to_string(a.first.size()) + " bytes), result tables " +
                             (table ? "identical" : "DIFFER") + " (runtime column excluded; 1 vs 4 decoding threads)"};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion ids to run; all when none are given.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  Experiments experiments;
  bool experiments_done = false;
  auto with_experiments = [&](std::function<Outcome(const Experiments&)> f) {
    return [&, f] {
      if (!experiments_done) {
        std::fprintf(stderr, "running directional experiments (3 seeds)...\n");
        run_experiments(experiments);
        experiments_done = true;
        std::printf("\n%s", mean_table(experiments.babble,
                                       {Mode::kAsr, Mode::kVsr, Mode::kAvsrBaseline, Mode::kAvsrVcafe}, "babble")
                                .c_str());
        std::printf("%s", mean_table(experiments.overlap, {Mode::kAvsrBaseline, Mode::kAvsrVcafe}, "overlap").c_str());
      }
      return f(experiments);
    };
  };
  const std::vector<Entry> entries{
      {1, "gradient suite", criterion_gradients},
      {2, "CTC oracle", criterion_ctc_oracle},
      {3, "mask identities", criterion_enhance_identities},
      {4, "beam search oracle", criterion_beam_oracle},
      {5, "SNR calibration", criterion_snr_calibration},
      {6, "V-CAFE vs baseline under babble", with_experiments(criterion_babble_gap)},
      {7, "ASR / VSR / V-CAFE ordering at -5 dB", with_experiments(criterion_modality_order)},
      {8, "overlapped speech", with_experiments(criterion_overlap)},
      {9, "determinism", criterion_determinism},
  };
  int failures = 0;
  std::vector<std::string> summary;
  std::size_t ran = 0;
  for (const auto& e : entries) {
    if (!only.empty() && std::find(only.begin(), only.end(), e.id) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("error: ") + ex.what()};
    }
    if (!o.pass) ++failures;
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %d %s: ", o.pass ? "PASS" : "FAIL", e.id, e.name);
    summary.push_back(head + o.detail);
    std::printf("%s\n", summary.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& s : summary) std::printf("%s\n", s.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failures, ran);
  std::string report;
  for (const auto& s : summary) report += s + "\n";
  atomic_write(output_root() / "acceptance_summary.txt", report);
  return failures == 0 ? 0 : 1;
}
