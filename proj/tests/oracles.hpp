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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "avsr/beam_search.hpp"
#include "avsr/ctc.hpp"
#include "avsr/lm.hpp"
#include "avsr/tensor.hpp"
#include "avsr/vocab.hpp"

namespace avsr::oracle {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline std::vector<std::size_t> ctc_collapse(const std::vector<std::size_t>& path,
                                             std::size_t blank) {
  std::vector<std::size_t> out;
  std::size_t prev = blank;
  for (std::size_t s : path) {
    if (s != blank && s != prev) out.push_back(s);
    prev = s;
  }
  return out;
}

// Sums the probability of every length-T path over V symbols that collapses
// to `labels`.
inline double ctc_brute_force(const Tensor& log_probs, const std::vector<std::size_t>& labels,
                              std::size_t blank = 0) {
  const std::size_t T = log_probs.dim(0), V = log_probs.dim(1);
  std::vector<std::size_t> path(T, 0);
  double total = kNegInf;
  while (true) {
    if (ctc_collapse(path, blank) == labels) {
      double lp = 0.0;
      for (std::size_t t = 0; t < T; ++t) lp += log_probs(t, path[t]);
      total = log_add(total, lp);
    }
    std::size_t t = 0;
    while (t < T && ++path[t] == V) path[t++] = 0;
    if (t == T) break;
  }
  return total;
}

// All sequences over `symbols` of length 0..max_len, in lexicographic order
// of (length, tokens).
inline std::vector<std::vector<std::size_t>> all_sequences(const std::vector<std::size_t>& symbols,
                                                           std::size_t max_len) {
  std::vector<std::vector<std::size_t>> out{{}};
  std::vector<std::vector<std::size_t>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& p : frontier) {
      for (std::size_t s : symbols) {
        auto q = p;
        q.push_back(s);
        next.push_back(q);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

struct ScoredSequence {
  std::vector<std::size_t> tokens;
  double score = kNegInf;
};

// Scores y directly: (1 - a) [sum_i log p_a(y_i | y_<i) + log p_a(eos | y)]
// + a log p_c(y) + b log p_lm(y, eos).
inline double joint_sequence_score(const std::vector<std::size_t>& y, const Tensor& ctc_log_probs,
                                   const NextTokenScorer& attention, const BigramLM* lm,
                                   const DecodeConfig& config) {
  double att = 0.0;
  for (std::size_t i = 0; i <= y.size(); ++i) {
    const std::vector<double> lp = attention(std::span<const std::size_t>(y.data(), i));
    att += lp[i < y.size() ? y[i] : Vocab::kEos];
  }
  double ctc = kNegInf;
  if (ctc_min_frames(y) <= ctc_log_probs.dim(0)) ctc = ctc_log_likelihood(ctc_log_probs, y);
  const double lm_score = lm != nullptr ? lm->sequence_log_prob(y) : 0.0;
  return combined_score(att, ctc, lm_score, config);
}

// Argmax over every content sequence up to max_len; ties go to the
// lexicographically smaller token sequence.
inline ScoredSequence exhaustive_decode(const Tensor& ctc_log_probs,
                                        const NextTokenScorer& attention, const BigramLM* lm,
                                        const Vocab& vocab, const DecodeConfig& config,
                                        std::size_t max_len) {
  std::vector<std::size_t> symbols;
  for (std::size_t t = Vocab::kFirstContent; t < vocab.size(); ++t) symbols.push_back(t);
  ScoredSequence best;
  for (const auto& y : all_sequences(symbols, max_len)) {
    const double s = joint_sequence_score(y, ctc_log_probs, attention, lm, config);
    if (s > best.score || (s == best.score && y < best.tokens)) best = {y, s};
  }
  return best;
}

}  // namespace avsr::oracle
