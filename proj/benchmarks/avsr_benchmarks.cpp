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

#include <benchmark/benchmark.h>

#include <random>

#include "avsr/ctc.hpp"
#include "avsr/experiment.hpp"
#include "avsr/ops.hpp"

namespace {

using namespace avsr;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

struct Fixture {
  ExperimentConfig config;
  Dataset data;
  std::unique_ptr<AvsrModel> model;
  BigramLM lm;

  explicit Fixture(Mode mode) {
    config.model.mode = mode;
    config.data.train_samples = 16;
    config.data.val_samples = 4;
    config.data.test_samples = 4;
    finalize(config);
    data = make_dataset(config);
    model = std::make_unique<AvsrModel>(config.model, data.vocab.size(), config.seed);
    lm = fit_lm(data.train, data.vocab);
  }
};

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) {
    Graph g;
    g.set_grad_enabled(false);
    benchmark::DoNotOptimize(matmul(g.constant(a), g.constant(b)).value().raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_CtcLoss(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < T / 4; ++i) labels.push_back(1 + i % 12);
  const Tensor logits = random_tensor({T, 15}, 3);
  for (auto _ : state) {
    Graph g;
    Var x = g.input(logits);
    Var loss = ctc_loss(log_softmax(x, 1), labels);
    g.backward(loss);
    benchmark::DoNotOptimize(x.grad().raw());
  }
}
BENCHMARK(BM_CtcLoss)->Arg(16)->Arg(64);

void BM_TrainStep(benchmark::State& state) {
  Fixture f(static_cast<Mode>(state.range(0)));
  const AVSample& sample = f.data.train.front();
  const auto labels = transcript_tokens(sample, f.data.vocab);
  for (auto _ : state) {
    Graph g;
    const JointLoss loss = f.model->loss(g, sample, labels, 0.8);
    g.backward(loss.total);
    benchmark::DoNotOptimize(loss.total.value().raw());
  }
  state.SetLabel(std::string(mode_name(f.model->mode())));
}
BENCHMARK(BM_TrainStep)
    ->Arg(static_cast<int>(Mode::kAsr))
    ->Arg(static_cast<int>(Mode::kAvsrBaseline))
    ->Arg(static_cast<int>(Mode::kAvsrVcafe))
    ->Unit(benchmark::kMicrosecond);

void BM_Decode(benchmark::State& state) {
  Fixture f(Mode::kAvsrVcafe);
  f.config.decode.beam_width = static_cast<std::size_t>(state.range(0));
  const AVSample& sample = f.data.test.front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.model->decode(sample, &f.lm, f.data.vocab, f.config.decode).best.score);
  }
}
BENCHMARK(BM_Decode)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
