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

#include "avsr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "avsr/error.hpp"
#include "avsr/io.hpp"
#include "avsr/ops.hpp"
#include "avsr/optim.hpp"
#include "avsr/rng.hpp"
#include "avsr/sample_io.hpp"

namespace avsr {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_sample_dims(const AVSample& s, const ExperimentConfig& config) {
  const auto& f = config.model.frontend;
  if (s.visual.frames.dim(1) != f.visual_dim || s.audio.spectro.dim(1) != f.audio_dim) {
    throw ConfigError("sample " + s.id + " has visual/audio dims " +
                      std::to_string(s.visual.frames.dim(1)) + "/" +
                      std::to_string(s.audio.spectro.dim(1)) + ", config expects " +
                      std::to_string(f.visual_dim) + "/" + std::to_string(f.audio_dim));
  }
}

// Draws the corruption of one sample from `rng`. The same number of draws
// happens on every branch so later draws do not shift.
AVSample draw_corruption(const AVSample& sample, std::size_t index, Rng& rng,
                         const std::vector<AVSample>& pool, const Dataset& data,
                         const ExperimentConfig& config, bool time_mask) {
  const TrainConfig& t = config.train;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const std::uint64_t snr_draw = rng();
  const std::uint64_t noise_seed = rng();
  const std::uint64_t partner_draw = rng();
  const std::uint64_t mask_len_draw = rng();
  const std::uint64_t mask_start_draw = rng();

  AVSample out = sample;
  if (t.noise != NoiseKind::kClean && u >= t.clean_fraction) {
    const double snr = t.snr_db[snr_draw % t.snr_db.size()];
    const NoiseSpec spec{t.noise, snr, noise_seed};
    if (t.noise == NoiseKind::kOverlap) {
      if (pool.size() < 2) throw ConfigError("overlap training needs at least two samples");
      std::size_t j = partner_draw % (pool.size() - 1);
      if (j >= index) ++j;
      out = corrupt_sample(sample, spec, data.alphabet, &pool[j]);
    } else {
      out = corrupt_sample(sample, spec, data.alphabet);
    }
  }
  if (time_mask && t.time_mask > 0) {
    Tensor& a = out.audio.spectro;
    const std::size_t len = std::min<std::size_t>(mask_len_draw % (t.time_mask + 1), a.dim(0));
    const std::size_t start = mask_start_draw % (a.dim(0) - len + 1);
    for (std::size_t s = start; s < start + len; ++s)
      for (std::size_t f = 0; f < a.dim(1); ++f) a(s, f) = 0.0;
  }
  return out;
}

std::vector<char> rendered_chars(const std::vector<std::size_t>& content, const Vocab& vocab) {
  std::vector<char> out;
  for (std::size_t c : content)
    for (char ch : vocab.symbol(vocab.token_of_content(c))) out.push_back(ch);
  return out;
}

}  // namespace

PhonemeAlphabet make_alphabet(const ExperimentConfig& config) {
  return PhonemeAlphabet::generate(config.data.alphabet);
}

Dataset make_dataset(const ExperimentConfig& config) {
  Dataset d;
  d.alphabet = make_alphabet(config);
  d.vocab = d.alphabet.vocab();
  if (config.data.dir.empty()) {
    const std::uint64_t seed = substream_seed(config.seed, "data");
    d.train = generate_split(d.alphabet, Split::kTrain, config.data.train_samples,
                             config.data.lengths, seed);
    d.val = generate_split(d.alphabet, Split::kVal, config.data.val_samples, config.data.lengths,
                           seed);
    d.test = generate_split(d.alphabet, Split::kTest, config.data.test_samples,
                            config.data.lengths, seed);
  } else {
    const std::filesystem::path dir(config.data.dir);
    d.train = read_samples(dir / "train.jsonl", d.vocab);
    d.val = read_samples(dir / "val.jsonl", d.vocab);
    d.test = read_samples(dir / "test.jsonl", d.vocab);
    if (d.train.empty() || d.val.empty() || d.test.empty()) {
      throw IoError("dataset " + dir.string() + " has an empty split");
    }
  }
  for (const auto* split : {&d.train, &d.val, &d.test})
    for (const auto& s : *split) check_sample_dims(s, config);
  return d;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data,
                   const ExperimentConfig& config) {
  write_samples(dir / "train.jsonl", data.train, data.vocab);
  write_samples(dir / "val.jsonl", data.val, data.vocab);
  write_samples(dir / "test.jsonl", data.test, data.vocab);
  json visemes = json::array();
  for (std::size_t p = 0; p < data.alphabet.phonemes(); ++p)
    visemes.push_back(data.alphabet.viseme_of(p));
  json manifest = {{"seed", config.seed},
                   {"symbols", data.alphabet.symbols()},
                   {"viseme_of", visemes},
                   {"files", {{"train", "train.jsonl"}, {"val", "val.jsonl"}, {"test", "test.jsonl"}}},
                   {"counts", {{"train", data.train.size()},
                               {"val", data.val.size()},
                               {"test", data.test.size()}}},
                   {"config", json::parse(config_to_json(config))}};
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

AVSample augment_training_sample(const AVSample& sample, std::size_t index, std::size_t epoch,
                                 const std::vector<AVSample>& pool, const Dataset& data,
                                 const ExperimentConfig& config) {
  Rng rng = make_rng(config.seed, "augment", epoch * pool.size() + index);
  return draw_corruption(sample, index, rng, pool, data, config, true);
}

std::vector<AVSample> validation_set(const Dataset& data, const ExperimentConfig& config) {
  std::vector<AVSample> out;
  out.reserve(data.val.size());
  for (std::size_t i = 0; i < data.val.size(); ++i) {
    Rng rng = make_rng(config.seed, "val.noise", i);
    out.push_back(draw_corruption(data.val[i], i, rng, data.val, data, config, false));
  }
  return out;
}

std::vector<AVSample> corrupt_split(const std::vector<AVSample>& samples, NoiseKind kind,
                                    double snr_db, const std::string& stream,
                                    const Dataset& data, const ExperimentConfig& config) {
  const std::string name =
      stream + "." + std::string(noise_kind_name(kind)) + "." + format_snr(snr_db);
  std::vector<AVSample> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Rng rng = make_rng(config.seed, name, i);
    const NoiseSpec spec{kind, snr_db, rng()};
    if (kind == NoiseKind::kOverlap) {
      if (samples.size() < 2) throw ConfigError("overlap evaluation needs at least two samples");
      std::size_t j = rng() % (samples.size() - 1);
      if (j >= i) ++j;
      out.push_back(corrupt_sample(samples[i], spec, data.alphabet, &samples[j]));
    } else {
      out.push_back(corrupt_sample(samples[i], spec, data.alphabet));
    }
  }
  return out;
}

double mean_loss(const AvsrModel& model, const std::vector<AVSample>& samples, const Vocab& vocab,
                 double loss_weight) {
  if (samples.empty()) throw InvalidArgument("mean_loss over an empty set");
  double total = 0.0;
  for (const auto& s : samples) {
    Graph g;
    g.set_grad_enabled(false);
    const auto labels = transcript_tokens(s, vocab);
    total += model.loss(g, s, labels, loss_weight).total.value().item() /
             static_cast<double>(labels.size() + 1);
  }
  return total / static_cast<double>(samples.size());
}

BigramLM fit_lm(const std::vector<AVSample>& train, const Vocab& vocab) {
  std::vector<std::vector<std::size_t>> corpus;
  corpus.reserve(train.size());
  for (const auto& s : train) corpus.push_back(transcript_tokens(s, vocab));
  return BigramLM::train(corpus, vocab);
}

TrainedModel train(const ExperimentConfig& config, const Dataset& data,
                   const EpochCallback& on_epoch) {
  if (data.train.empty()) throw ConfigError("training split is empty");
  const TrainConfig& tc = config.train;
  TrainedModel out;
  out.config = config;
  out.model = std::make_unique<AvsrModel>(config.model, data.vocab.size(), config.seed);
  out.lm = fit_lm(data.train, data.vocab);
  AvsrModel& model = *out.model;
  ParamStore& params = model.params();
  AdamW opt(params, tc.optimizer);
  GradBuffer grads(params);

  const std::vector<AVSample> val = validation_set(data, config);
  auto start = std::chrono::steady_clock::now();
  EpochLog initial{0, std::nan(""), mean_loss(model, val, data.vocab, tc.loss_weight),
                   seconds_since(start)};
  out.log.push_back(initial);
  if (on_epoch) on_epoch(initial);

  std::vector<std::size_t> order(data.train.size());
  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(config.seed, "shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += tc.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), b + tc.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - b);
      grads.zero();
      double batch_loss = 0.0;
      for (std::size_t k = b; k < end; ++k) {
        const std::size_t idx = order[k];
        const AVSample s = augment_training_sample(data.train[idx], idx, epoch, data.train, data,
                                                   config);
        const auto labels = transcript_tokens(s, data.vocab);
        Graph g;
        JointLoss jl = model.loss(g, s, labels, tc.loss_weight);
        Var l = scale(jl.total, inv_batch / static_cast<double>(labels.size() + 1));
        batch_loss += l.value().item();
        g.backward(l);
        g.collect_param_grads(grads);
      }
      ++out.steps;
      if (!std::isfinite(batch_loss) || !grads.all_finite()) {
        throw DivergenceError("training diverged at step " + std::to_string(out.steps) +
                              " (epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index) + "): loss = " +
                              std::to_string(batch_loss));
      }
      if (tc.grad_clip > 0.0) {
        const double norm = grads.global_norm();
        if (norm > tc.grad_clip) grads.scale(tc.grad_clip / norm);
      }
      opt.step(params, grads);
      epoch_loss += batch_loss * static_cast<double>(end - b);
    }
    EpochLog entry{epoch, epoch_loss / static_cast<double>(order.size()),
                   mean_loss(model, val, data.vocab, tc.loss_weight), 0.0};
    entry.seconds = seconds_since(start);
    out.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return out;
}

TrainedModel load_trained(const std::filesystem::path& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  TrainedModel out;
  out.config = ck.config;
  const Vocab vocab = make_alphabet(ck.config).vocab();
  out.model = std::make_unique<AvsrModel>(ck.config.model, vocab.size(), ck.config.seed);
  assign_parameters(out.model->params(), ck.params);
  if (!ck.lm_counts.empty()) out.lm = BigramLM::from_counts(ck.lm_counts, vocab);
  return out;
}

void save_trained(const std::filesystem::path& checkpoint, const TrainedModel& trained) {
  save_checkpoint(checkpoint, trained.config, trained.model->params(), trained.lm);
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_loss,val_loss,seconds\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.3f\n", e.epoch, e.train_loss, e.val_loss,
                  e.seconds);
    out += buf;
  }
  return out;
}

std::vector<DecodedSample> decode_samples(const AvsrModel& model, const BigramLM& lm,
                                          const std::vector<AVSample>& samples,
                                          const Vocab& vocab, const DecodeConfig& decode,
                                          std::size_t threads) {
  std::vector<DecodedSample> out(samples.size());
  const BigramLM* lm_ptr = lm.empty() ? nullptr : &lm;
  auto work = [&](std::size_t i) {
    const AVSample& s = samples[i];
    DecodedSample& d = out[i];
    d.id = s.id;
    d.reference = s.transcript;
    d.hypothesis = vocab.content_of_tokens(model.decode(s, lm_ptr, vocab, decode).best.tokens);
    d.wer = wer(d.hypothesis, d.reference);
    d.cer = cer(d.hypothesis, d.reference, vocab);
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, samples.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) work(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < samples.size(); i += threads) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

ResultTable evaluate_sweep(const AvsrModel& model, const BigramLM& lm, const Dataset& data,
                           const ExperimentConfig& config) {
  ResultTable table;
  const std::string mode(mode_name(model.mode()));
  for (NoiseKind kind : config.eval.noise) {
    for (double snr : config.eval.snr_db) {
      const auto start = std::chrono::steady_clock::now();
      const auto samples = corrupt_split(data.test, kind, snr, "eval", data, config);
      const auto decoded =
          decode_samples(model, lm, samples, data.vocab, config.decode, config.eval.threads);
      std::size_t word_edits = 0, words = 0, char_edits = 0, chars = 0;
      for (const auto& d : decoded) {
        word_edits += levenshtein(d.hypothesis, d.reference);
        words += d.reference.size();
        const auto h = rendered_chars(d.hypothesis, data.vocab);
        const auto r = rendered_chars(d.reference, data.vocab);
        char_edits += levenshtein(h, r);
        chars += r.size();
      }
      ResultRow row;
      row.mode = mode;
      row.noise = std::string(noise_kind_name(kind));
      row.snr_db = kind == NoiseKind::kClean ? kCleanSnr : snr;
      row.wer = 100.0 * static_cast<double>(word_edits) / static_cast<double>(words);
      row.cer = 100.0 * static_cast<double>(char_edits) / static_cast<double>(chars);
      row.count = decoded.size();
      row.runtime_s = seconds_since(start);
      if (kind == NoiseKind::kClean && table.find(row.mode, row.noise, row.snr_db)) continue;
      table.add(std::move(row));
    }
  }
  return table;
}

std::string decode_jsonl(const std::vector<DecodedSample>& decoded, const Vocab& vocab) {
  std::string out;
  for (const auto& d : decoded) {
    json j = {{"sample_id", d.id},
              {"hypothesis", vocab.render(vocab.tokens_of_content(d.hypothesis))},
              {"reference", vocab.render(vocab.tokens_of_content(d.reference))},
              {"wer", d.wer}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string mask_csv(const Tensor& mask) {
  std::string out = "frame,channel,value\n";
  char buf[96];
  for (std::size_t t = 0; t < mask.dim(0); ++t) {
    for (std::size_t c = 0; c < mask.dim(1); ++c) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", t, c, mask(t, c));
      out += buf;
    }
  }
  return out;
}

ExperimentConfig tiny_config(Mode mode) {
  ExperimentConfig c;
  c.seed = 3;
  c.model.mode = mode;
  c.model.frontend = {.visual_dim = 3, .audio_dim = 4, .d1 = 4, .audio_hidden = 3};
  c.model.vcafe.d2 = 4;
  c.model.encoder = {.layers = 1, .dim = 4, .ff_dim = 6, .heads = 2, .conv_kernel = 3};
  c.model.decoder = {.layers = 1, .dim = 4, .ff_dim = 6, .heads = 2};
  c.data.alphabet.phonemes = 4;
  c.data.alphabet.visemes = 2;
  c.data.alphabet.preferred_successors = 1;
  c.data.lengths = {3, 3};
  finalize(c);
  return c;
}

GradCheckSummary run_gradcheck(const GradCheckConfig& gc) {
  ExperimentConfig config = tiny_config(gc.mode);
  config.seed = gc.seed;
  finalize(config);
  const PhonemeAlphabet alphabet = make_alphabet(config);
  const Vocab vocab = alphabet.vocab();
  AVSample sample = generate_sample(alphabet, config.data.lengths,
                                    substream_seed(config.seed, "gradcheck"), "gradcheck");
  AvsrModel model(config.model, vocab.size(), config.seed);
  const auto labels = transcript_tokens(sample, vocab);
  const double factor = gc.zero_loss ? 0.0 : 1.0;
  ParamLoss loss = [&](Graph& g, const ParamStore& s) {
    return scale(model.loss(g, sample, labels, gc.loss_weight, &s, gc.hook).total, factor);
  };
  GradCheckSummary summary;
  summary.groups = check_param_gradients(model.params(), loss, default_param_group);
  for (const auto& r : summary.groups) {
    if (!(r.max_rel_error < gc.tolerance)) {
      summary.passed = false;
      summary.failing.push_back(r.group);
    }
  }
  return summary;
}

}  // namespace avsr
