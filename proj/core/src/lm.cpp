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

#include "avsr/lm.hpp"

#include <cmath>

#include "avsr/error.hpp"

namespace avsr {

namespace {

std::vector<double> totals_of(const Tensor& counts) {
  std::vector<double> totals(counts.dim(0), 0.0);
  for (std::size_t r = 0; r < counts.dim(0); ++r) {
    for (std::size_t c = 0; c < counts.dim(1); ++c) totals[r] += counts(r, c);
  }
  return totals;
}

}  // namespace

BigramLM BigramLM::train(std::span<const std::vector<std::size_t>> corpus, const Vocab& vocab) {
  if (corpus.empty()) throw InvalidArgument("bigram LM needs a non-empty corpus");
  BigramLM lm;
  lm.content_ = vocab.content_size();
  lm.outcomes_ = lm.content_ + 1;
  lm.counts_ = Tensor({lm.content_ + 1, lm.outcomes_});
  for (const auto& sentence : corpus) {
    std::size_t prev = Vocab::kBos;
    for (std::size_t tok : sentence) {
      if (!vocab.is_content(tok)) throw InvalidArgument("LM corpus holds a non-content token");
      lm.counts_(lm.context_row(prev), lm.outcome_col(tok)) += 1.0;
      prev = tok;
    }
    lm.counts_(lm.context_row(prev), lm.outcome_col(Vocab::kEos)) += 1.0;
  }
  lm.row_totals_ = totals_of(lm.counts_);
  return lm;
}

BigramLM BigramLM::from_counts(Tensor counts, const Vocab& vocab) {
  if (counts.rank() != 2 || counts.dim(0) != vocab.content_size() + 1 ||
      counts.dim(1) != vocab.content_size() + 1) {
    throw ShapeError("bigram count table " + shape_str(counts.shape()) +
                     " does not match the vocabulary");
  }
  BigramLM lm;
  lm.content_ = vocab.content_size();
  lm.outcomes_ = lm.content_ + 1;
  lm.counts_ = std::move(counts);
  lm.row_totals_ = totals_of(lm.counts_);
  return lm;
}

std::size_t BigramLM::context_row(std::size_t prev) const {
  if (prev == Vocab::kBos) return 0;
  if (prev < Vocab::kFirstContent || prev >= Vocab::kFirstContent + content_) {
    throw InvalidArgument("LM context must be bos or a content token");
  }
  return prev - Vocab::kFirstContent + 1;
}

std::size_t BigramLM::outcome_col(std::size_t next) const {
  if (next == Vocab::kEos) return content_;
  if (next < Vocab::kFirstContent || next >= Vocab::kFirstContent + content_) {
    throw InvalidArgument("LM outcome must be eos or a content token");
  }
  return next - Vocab::kFirstContent;
}

double BigramLM::prob(std::size_t prev, std::size_t next) const {
  if (empty()) throw InvalidArgument("LM has not been trained");
  const std::size_t r = context_row(prev);
  return (counts_(r, outcome_col(next)) + 1.0) /
         (row_totals_[r] + static_cast<double>(outcomes_));
}

double BigramLM::log_prob(std::size_t prev, std::size_t next) const {
  return std::log(prob(prev, next));
}

double BigramLM::sequence_log_prob(std::span<const std::size_t> tokens) const {
  double total = 0.0;
  std::size_t prev = Vocab::kBos;
  for (std::size_t t : tokens) {
    total += log_prob(prev, t);
    prev = t;
  }
  return total + log_prob(prev, Vocab::kEos);
}

}  // namespace avsr
