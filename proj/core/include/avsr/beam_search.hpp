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
#include <functional>
#include <span>
#include <vector>

#include "avsr/lm.hpp"
#include "avsr/tensor.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

struct DecodeConfig {
  // alpha: CTC weight
  double ctc_weight = 0.3;
  // beta: LM weight
  double lm_weight = 0.1;
  std::size_t beam_width = 4;
  // Longest content sequence considered; 0 means the number of frames.
  std::size_t max_length = 0;
  // Divide the final score by (length + 1) when ranking completed hypotheses.
  bool length_normalize = false;
};

struct Hypothesis {
  std::vector<std::size_t> tokens;  // content tokens, no bos/eos
  double att_score = 0.0;           // log p_a(prefix), plus eos once completed
  double ctc_score = 0.0;           // CTC prefix score, or full log p_c once completed
  double lm_score = 0.0;            // log p_lm(prefix), plus eos once completed
  double score = 0.0;               // (1 - alpha) att + alpha ctc + beta lm
  // CTC prefix state: log probabilities of the prefix ending at frame t in a
  // non-blank / blank symbol.
  std::vector<double> ctc_nonblank;
  std::vector<double> ctc_blank;
};

// (1 - alpha) att + alpha ctc + beta lm, skipping terms whose weight is zero.
double combined_score(double att, double ctc, double lm, const DecodeConfig& config);

// Log-probabilities over the full vocabulary for the next token after
// bos + prefix.
using NextTokenScorer = std::function<std::vector<double>(std::span<const std::size_t> prefix)>;

// Incremental CTC prefix scoring over per-frame log-probabilities [T, V].
class CtcPrefixScorer {
 public:
  CtcPrefixScorer(const Tensor& log_probs, std::size_t blank);

  // State of the empty prefix.
  void init(Hypothesis& root) const;
  // Fills the CTC fields of `child` = parent + token; returns the prefix score.
  double extend(const Hypothesis& parent, std::size_t token, Hypothesis& child) const;
  // Full-sequence log p_c for the parent's prefix.
  double final_score(const Hypothesis& parent) const;
  std::size_t frames() const noexcept { return frames_; }

 private:
  const Tensor& log_probs_;
  std::size_t blank_;
  std::size_t frames_;
};

struct BeamResult {
  Hypothesis best;
  std::vector<Hypothesis> completed;
};

// Beam search maximizing (1 - alpha) log p_a + alpha log p_c + beta log p_lm.
// Ties are broken by lexicographic token order.
BeamResult beam_search(const Tensor& ctc_log_probs, const NextTokenScorer& attention,
                       const BigramLM* lm, const Vocab& vocab, const DecodeConfig& config);

}  // namespace avsr
