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

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "avsr/beam_search.hpp"
#include "avsr/error.hpp"
#include "avsr/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace avsr {
namespace {

using testing::random_tensor;

Tensor log_softmax_rows(const Tensor& logits) {
  Graph g;
  return log_softmax(g.constant(logits), 1).value();
}

// Attention scorer with an independent random distribution per prefix.
NextTokenScorer random_scorer(std::size_t vocab_size, std::uint64_t seed) {
  auto cache = std::make_shared<std::map<std::vector<std::size_t>, std::vector<double>>>();
  return [=](std::span<const std::size_t> prefix) {
    std::vector<std::size_t> key(prefix.begin(), prefix.end());
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    std::uint64_t h = seed;
    for (std::size_t t : key) h = h * 1000003u + t + 1;
    Tensor lp = log_softmax_rows(random_tensor({1, vocab_size}, h, 1.5));
    std::vector<double> out(lp.data().begin(), lp.data().end());
    (*cache)[key] = out;
    return out;
  };
}

TEST(BeamSearch, FullWidthMatchesExhaustiveOracle) {
  Vocab vocab({"a", "b", "c"});
  const std::vector<std::vector<std::size_t>> corpus{{3, 4}, {4, 5}, {3}};
  BigramLM lm = BigramLM::train(corpus, vocab);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t T = 2 + seed % 3;
    Tensor ctc = log_softmax_rows(random_tensor({T, vocab.size()}, seed, 2.0));
    NextTokenScorer att = random_scorer(vocab.size(), seed + 77);
    DecodeConfig config{.ctc_weight = 0.3, .lm_weight = 0.1, .beam_width = 64, .max_length = 2};
    BeamResult result = beam_search(ctc, att, &lm, vocab, config);
    auto best = oracle::exhaustive_decode(ctc, att, &lm, vocab, config, 2);
    EXPECT_EQ(result.best.tokens, best.tokens) << "seed " << seed;
    EXPECT_NEAR(result.best.score, best.score, 1e-9) << "seed " << seed;
  }
}

TEST(BeamSearch, ScoresOfCompletedHypothesesAreExact) {
  Vocab vocab({"a", "b"});
  Tensor ctc = log_softmax_rows(random_tensor({3, vocab.size()}, 5));
  NextTokenScorer att = random_scorer(vocab.size(), 6);
  DecodeConfig config{.ctc_weight = 0.5, .lm_weight = 0.0, .beam_width = 64, .max_length = 2};
  BeamResult result = beam_search(ctc, att, nullptr, vocab, config);
  for (const auto& h : result.completed) {
    EXPECT_NEAR(h.score, oracle::joint_sequence_score(h.tokens, ctc, att, nullptr, config), 1e-9);
  }
}

TEST(BeamSearch, TiesBreakLexicographically) {
  Vocab vocab({"a", "b", "c"});
  Tensor ctc({2, vocab.size()}, std::log(1.0 / 6.0));
  // Every single-token sequence scores the same; eos is impossible at start.
  NextTokenScorer att = [&](std::span<const std::size_t> prefix) {
    std::vector<double> lp(vocab.size(), -std::numeric_limits<double>::infinity());
    if (prefix.empty()) {
      for (std::size_t t = 3; t < 6; ++t) lp[t] = std::log(1.0 / 3.0);
    } else {
      lp[Vocab::kEos] = 0.0;
    }
    return lp;
  };
  DecodeConfig config{.ctc_weight = 0.0, .lm_weight = 0.0, .beam_width = 8, .max_length = 2};
  BeamResult result = beam_search(ctc, att, nullptr, vocab, config);
  EXPECT_EQ(result.best.tokens, (std::vector<std::size_t>{3}));
}

TEST(BeamSearch, PureCtcRecoversDominantPath) {
  Vocab vocab({"a", "b"});
  Tensor ctc({4, vocab.size()}, std::log(1e-6));
  const std::size_t path[] = {3, 0, 4, 4};
  for (std::size_t t = 0; t < 4; ++t) ctc(t, path[t]) = 0.0;
  NextTokenScorer att = random_scorer(vocab.size(), 9);
  DecodeConfig config{.ctc_weight = 1.0, .lm_weight = 0.0, .beam_width = 4};
  EXPECT_EQ(beam_search(ctc, att, nullptr, vocab, config).best.tokens,
            (std::vector<std::size_t>{3, 4}));
}

TEST(BeamSearch, LmWeightWithoutLmRejected) {
  Vocab vocab({"a"});
  Tensor ctc({2, vocab.size()}, 0.0);
  DecodeConfig config{.lm_weight = 0.5};
  EXPECT_THROW(beam_search(ctc, random_scorer(vocab.size(), 1), nullptr, vocab, config),
               InvalidArgument);
}

TEST(CtcPrefixScorer, FinalScoreMatchesForwardAlgorithm) {
  Vocab vocab({"a", "b", "c"});
  Tensor lp = log_softmax_rows(random_tensor({5, vocab.size()}, 10));
  CtcPrefixScorer scorer(lp, Vocab::kBlank);
  Hypothesis root;
  scorer.init(root);
  std::vector<std::size_t> symbols{3, 4, 5};
  for (const auto& y : oracle::all_sequences(symbols, 3)) {
    Hypothesis h = root;
    for (std::size_t t : y) {
      Hypothesis child;
      child.tokens = h.tokens;
      child.tokens.push_back(t);
      scorer.extend(h, t, child);
      h = child;
    }
    if (ctc_min_frames(y) > 5) continue;
    EXPECT_NEAR(scorer.final_score(h), ctc_log_likelihood(lp, y), 1e-10);
  }
}

TEST(CtcPrefixScorer, PrefixScoreSumsOverContinuations) {
  // The prefix score of y is the total mass of labelings that start with y
  // (including y itself).
  Vocab vocab({"a", "b"});
  Tensor lp = log_softmax_rows(random_tensor({3, vocab.size()}, 11));
  CtcPrefixScorer scorer(lp, Vocab::kBlank);
  Hypothesis root, child;
  scorer.init(root);
  child.tokens = {3};
  const double prefix = scorer.extend(root, 3, child);
  double total = 0.0;
  for (const auto& y : oracle::all_sequences({1, 2, 3, 4}, 3)) {
    if (y.empty() || y[0] != 3 || ctc_min_frames(y) > 3) continue;
    total += std::exp(ctc_log_likelihood(lp, y));
  }
  EXPECT_NEAR(std::exp(prefix), total, 1e-12);
}

}  // namespace
}  // namespace avsr
