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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "avsr/tensor.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

// Add-one smoothed token bigram model. Contexts are bos and the content
// tokens; outcomes are the content tokens and eos.
class BigramLM {
 public:
  BigramLM() = default;
  // `corpus` holds content-token sequences.
  static BigramLM train(std::span<const std::vector<std::size_t>> corpus, const Vocab& vocab);
  // Rebuilds a model from a count table produced by counts().
  static BigramLM from_counts(Tensor counts, const Vocab& vocab);

  // log p(next | prev); prev is bos or content, next is content or eos.
  double log_prob(std::size_t prev, std::size_t next) const;
  double prob(std::size_t prev, std::size_t next) const;
  // log p_lm(y) including the transition into eos.
  double sequence_log_prob(std::span<const std::size_t> tokens) const;

  std::size_t num_outcomes() const noexcept { return outcomes_; }
  // [contexts, outcomes] transition counts.
  const Tensor& counts() const noexcept { return counts_; }
  bool empty() const noexcept { return counts_.empty(); }

 private:
  std::size_t context_row(std::size_t prev) const;
  std::size_t outcome_col(std::size_t next) const;

  Tensor counts_;
  std::vector<double> row_totals_;
  std::size_t content_ = 0;
  std::size_t outcomes_ = 0;
};

}  // namespace avsr
