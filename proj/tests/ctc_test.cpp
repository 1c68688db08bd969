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

#include "avsr/ctc.hpp"
#include "avsr/error.hpp"
#include "avsr/gradcheck.hpp"
#include "avsr/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace avsr {
namespace {

using testing::random_tensor;

Tensor log_softmax_rows(const Tensor& logits) {
  Graph g;
  g.set_grad_enabled(false);
  return log_softmax(g.constant(logits), 1).value();
}

TEST(Ctc, TwoFramesSingleLabelSumsThreePaths) {
  Tensor lp = log_softmax_rows(random_tensor({2, 3}, 1));
  const std::vector<std::size_t> y{1};
  const double expected = std::log(std::exp(lp(0, 1) + lp(1, 1)) + std::exp(lp(0, 1) + lp(1, 0)) +
                                   std::exp(lp(0, 0) + lp(1, 1)));
  EXPECT_NEAR(ctc_log_likelihood(lp, y), expected, 1e-12);
}

TEST(Ctc, CertainAlignmentHasZeroLoss) {
  Tensor lp({3, 3}, std::log(1e-300));
  lp(0, 1) = 0.0;
  lp(1, 0) = 0.0;
  lp(2, 2) = 0.0;
  const std::vector<std::size_t> y{1, 2};
  EXPECT_NEAR(ctc_log_likelihood(lp, y), 0.0, 1e-12);
}

TEST(Ctc, RepeatedLabelsNeedSeparatingBlank) {
  const std::vector<std::size_t> y{1, 1};
  EXPECT_EQ(ctc_min_frames(y), 3u);
  Tensor lp = log_softmax_rows(random_tensor({2, 3}, 2));
  EXPECT_THROW(ctc_log_likelihood(lp, y), InfeasibleAlignment);
}

TEST(Ctc, TooManyLabelsRejected) {
  Tensor lp = log_softmax_rows(random_tensor({2, 4}, 3));
  const std::vector<std::size_t> y{1, 2, 3};
  EXPECT_THROW(ctc_log_likelihood(lp, y), InfeasibleAlignment);
}

TEST(Ctc, BlankInsideLabelsRejected) {
  Tensor lp = log_softmax_rows(random_tensor({3, 3}, 4));
  const std::vector<std::size_t> y{1, 0};
  EXPECT_THROW(ctc_log_likelihood(lp, y), InvalidArgument);
}

TEST(Ctc, MatchesBruteForceOnSmallInstances) {
  std::uint64_t seed = 100;
  for (std::size_t T = 1; T <= 5; ++T) {
    for (std::size_t V = 2; V <= 4; ++V) {
      Tensor lp = log_softmax_rows(random_tensor({T, V}, ++seed, 2.0));
      std::vector<std::size_t> content;
      for (std::size_t s = 1; s < V; ++s) content.push_back(s);
      for (const auto& y : oracle::all_sequences(content, 3)) {
        if (ctc_min_frames(y) > T) continue;
        EXPECT_NEAR(ctc_log_likelihood(lp, y), oracle::ctc_brute_force(lp, y), 1e-9)
            << "T=" << T << " V=" << V;
      }
    }
  }
}

TEST(Ctc, PosteriorOverAllLabelingsSumsToOne) {
  // Every path collapses to exactly one labeling, so the labelings of a
  // 3-frame, 3-symbol problem partition the probability mass.
  Tensor lp = log_softmax_rows(random_tensor({3, 3}, 5));
  double total = 0.0;
  for (const auto& y : oracle::all_sequences({1, 2}, 3)) {
    if (ctc_min_frames(y) > 3) continue;
    total += std::exp(ctc_log_likelihood(lp, y));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Ctc, LossGradientCheck) {
  const std::vector<std::size_t> y{1, 2, 2};
  const double err = check_input_gradients(
      {random_tensor({6, 4}, 6)},
      [&](Graph&, std::span<const Var> in) { return ctc_loss(in[0], y); });
  EXPECT_LT(err, 1e-5);
}

TEST(Ctc, LossEqualsNegativeLogLikelihood) {
  Tensor logits = random_tensor({5, 4}, 7);
  const std::vector<std::size_t> y{3, 1};
  Graph g;
  const double loss = ctc_loss(g.constant(logits), y).value().item();
  EXPECT_NEAR(loss, -ctc_log_likelihood(log_softmax_rows(logits), y), 1e-12);
}

}  // namespace
}  // namespace avsr
