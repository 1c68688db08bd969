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

#include "avsr/error.hpp"
#include "avsr/gradcheck.hpp"
#include "avsr/lm.hpp"
#include "avsr/ops.hpp"
#include "avsr/seqmodel.hpp"
#include "avsr/vocab.hpp"
#include "test_util.hpp"

namespace avsr {
namespace {

using testing::probe_loss;
using testing::random_tensor;

const EncoderConfig kTinyEncoder{.layers = 1, .dim = 4, .ff_dim = 6, .heads = 2, .conv_kernel = 3};
const DecoderConfig kTinyDecoder{.layers = 1, .dim = 4, .ff_dim = 6, .heads = 2};

struct Model {
  ParamStore store;
  SeqModelParams params;
  explicit Model(std::size_t vocab_size, std::uint64_t seed = 1,
                 EncoderConfig enc = kTinyEncoder, DecoderConfig dec = kTinyDecoder) {
    Rng rng(seed);
    params = SeqModelParams::create(store, enc, dec, vocab_size, rng);
  }
};

TEST(Vocab, LayoutAndRoundTrip) {
  Vocab v({"a", "b", "c"});
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.content_size(), 3u);
  EXPECT_EQ(v.symbol(Vocab::kBlank), "<blank>");
  EXPECT_TRUE(v.is_content(3));
  EXPECT_FALSE(v.is_content(Vocab::kEos));
  const auto toks = v.parse("c a b");
  EXPECT_EQ(toks, (std::vector<std::size_t>{5, 3, 4}));
  EXPECT_EQ(v.render(toks), "c a b");
  EXPECT_THROW(v.parse("a z"), InvalidArgument);
}

TEST(Encoder, PreservesLength) {
  Model m(6);
  Graph g;
  Var out = encode(g, g.constant(random_tensor({5, 4}, 2)), m.store, m.params.encoder);
  EXPECT_EQ(out.value().shape(), (Shape{5, 4}));
  EXPECT_TRUE(out.value().all_finite());
}

TEST(Decoder, IsCausal) {
  // Logits at position i depend only on inputs 0..i; changing later tokens
  // leaves them bit-identical.
  Model m(7, 3);
  Tensor memory = random_tensor({5, 4}, 4);
  const std::vector<std::size_t> a{Vocab::kBos, 3, 4, 5, 6};
  Graph g;
  Tensor la = decoder_logits(g, g.constant(memory), a, m.store, m.params.decoder).value();
  for (std::size_t cut = 1; cut < a.size(); ++cut) {
    std::vector<std::size_t> b = a;
    for (std::size_t i = cut; i < b.size(); ++i) b[i] = 3 + (b[i] + 1) % 4;
    Tensor lb = decoder_logits(g, g.constant(memory), b, m.store, m.params.decoder).value();
    for (std::size_t i = 0; i < cut; ++i)
      for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(la(i, j), lb(i, j)) << "cut " << cut;
  }
}

TEST(Decoder, UniformOutputGivesLogVocabPerToken) {
  Model m(6, 5);
  for (const char* name : {"decoder.out.w", "decoder.out.b"}) m.store[m.store.id(name)].value.fill(0.0);
  const std::vector<std::size_t> y{3, 4, 5};
  Graph g;
  const double loss =
      attention_objective(g, g.constant(random_tensor({4, 4}, 6)), y, m.store, m.params).value().item();
  EXPECT_NEAR(loss, 4.0 * std::log(6.0), 1e-12);
}

TEST(JointLoss, EndpointsSelectSingleObjective) {
  Model m(6, 7);
  const std::vector<std::size_t> y{3, 5};
  Graph g;
  Var enc = encode(g, g.constant(random_tensor({4, 4}, 8)), m.store, m.params.encoder);
  const double att = attention_objective(g, enc, y, m.store, m.params).value().item();
  const double ctc = ctc_objective(g, enc, y, m.store, m.params).value().item();
  EXPECT_EQ(joint_loss(g, enc, y, m.store, m.params, 1.0).total.value().item(), att);
  EXPECT_EQ(joint_loss(g, enc, y, m.store, m.params, 0.0).total.value().item(), ctc);
  EXPECT_NEAR(joint_loss(g, enc, y, m.store, m.params, 0.8).total.value().item(),
              0.8 * att + 0.2 * ctc, 1e-12);
  EXPECT_THROW(joint_loss(g, enc, y, m.store, m.params, 1.5), InvalidArgument);
}

TEST(JointLoss, InfeasibleCtcRejected) {
  Model m(6, 9);
  const std::vector<std::size_t> y{3, 4, 5, 3};
  Graph g;
  Var enc = encode(g, g.constant(random_tensor({3, 4}, 10)), m.store, m.params.encoder);
  EXPECT_THROW(ctc_objective(g, enc, y, m.store, m.params), InfeasibleAlignment);
}

TEST(SeqModel, ParameterGradientsMatchFiniteDifferences) {
  Model m(6, 11);
  const std::vector<std::size_t> y{3, 4, 4};
  Tensor x = random_tensor({5, 4}, 12);
  auto reports = check_param_gradients(
      m.store,
      [&](Graph& g, const ParamStore& s) {
        Var enc = encode(g, g.constant(x), s, m.params.encoder);
        return joint_loss(g, enc, y, s, m.params, 0.8).total;
      },
      default_param_group);
  ASSERT_GE(reports.size(), 3u);
  for (const auto& r : reports) EXPECT_LT(r.max_rel_error, 1e-4) << r.group << " " << r.worst_param;
}

TEST(BigramLM, AddOneFormula) {
  Vocab v({"a", "b", "c"});
  const std::vector<std::vector<std::size_t>> corpus{{3, 4}, {3, 3, 5}, {4}};
  BigramLM lm = BigramLM::train(corpus, v);
  ASSERT_EQ(lm.num_outcomes(), 4u);
  // bos: followed by a twice, b once.
  EXPECT_DOUBLE_EQ(lm.prob(Vocab::kBos, 3), (2.0 + 1.0) / (3.0 + 4.0));
  EXPECT_DOUBLE_EQ(lm.prob(Vocab::kBos, 5), 1.0 / 7.0);
  // a: followed by b, a, c once each.
  EXPECT_DOUBLE_EQ(lm.prob(3, 4), 2.0 / 7.0);
  EXPECT_DOUBLE_EQ(lm.prob(3, Vocab::kEos), 1.0 / 7.0);
  // b: followed by eos twice.
  EXPECT_DOUBLE_EQ(lm.prob(4, Vocab::kEos), 3.0 / 6.0);
  // c: eos once.
  EXPECT_DOUBLE_EQ(lm.prob(5, Vocab::kEos), 2.0 / 5.0);
}

TEST(BigramLM, RowsAreDistributions) {
  Vocab v({"a", "b", "c", "d"});
  const std::vector<std::vector<std::size_t>> corpus{{3, 4, 5}, {6, 3}, {5, 5, 6, 4}};
  BigramLM lm = BigramLM::train(corpus, v);
  for (std::size_t prev : {Vocab::kBos, std::size_t{3}, std::size_t{4}, std::size_t{5}, std::size_t{6}}) {
    double total = lm.prob(prev, Vocab::kEos);
    for (std::size_t next = 3; next < v.size(); ++next) total += lm.prob(prev, next);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(BigramLM, SequenceProbabilityIncludesEos) {
  Vocab v({"a", "b"});
  const std::vector<std::vector<std::size_t>> corpus{{3, 4}};
  BigramLM lm = BigramLM::train(corpus, v);
  const std::vector<std::size_t> y{3, 4};
  EXPECT_NEAR(lm.sequence_log_prob(y),
              lm.log_prob(Vocab::kBos, 3) + lm.log_prob(3, 4) + lm.log_prob(4, Vocab::kEos), 1e-15);
  BigramLM copy = BigramLM::from_counts(lm.counts(), v);
  EXPECT_EQ(copy.sequence_log_prob(y), lm.sequence_log_prob(y));
}

TEST(BigramLM, InvalidContextsRejected) {
  Vocab v({"a", "b"});
  const std::vector<std::vector<std::size_t>> corpus{{3}};
  BigramLM lm = BigramLM::train(corpus, v);
  EXPECT_THROW(lm.prob(Vocab::kEos, 3), InvalidArgument);
  EXPECT_THROW(lm.prob(3, Vocab::kBos), InvalidArgument);
}

}  // namespace
}  // namespace avsr
