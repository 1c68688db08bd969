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

#include "avsr/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avsr/error.hpp"

namespace avsr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double ranking_score(const Hypothesis& h, const DecodeConfig& config) {
  if (!config.length_normalize) return h.score;
  return h.score / static_cast<double>(h.tokens.size() + 1);
}

// Higher score first; equal scores fall back to lexicographic token order.
bool better(const Hypothesis& a, const Hypothesis& b, const DecodeConfig& config) {
  const double sa = ranking_score(a, config), sb = ranking_score(b, config);
  if (sa != sb) return sa > sb;
  return a.tokens < b.tokens;
}

}  // namespace

double combined_score(double att, double ctc, double lm, const DecodeConfig& config) {
  double s = 0.0;
  if (config.ctc_weight < 1.0) s += (1.0 - config.ctc_weight) * att;
  if (config.ctc_weight > 0.0) s += config.ctc_weight * ctc;
  if (config.lm_weight > 0.0) s += config.lm_weight * lm;
  return s;
}

CtcPrefixScorer::CtcPrefixScorer(const Tensor& log_probs, std::size_t blank)
    : log_probs_(log_probs), blank_(blank), frames_(log_probs.dim(0)) {
  if (log_probs.rank() != 2) throw ShapeError("CTC prefix scorer expects [T, V]");
}

void CtcPrefixScorer::init(Hypothesis& root) const {
  root.ctc_nonblank.assign(frames_, kNegInf);
  root.ctc_blank.assign(frames_, kNegInf);
  double acc = 0.0;
  for (std::size_t t = 0; t < frames_; ++t) {
    acc += log_probs_(t, blank_);
    root.ctc_blank[t] = acc;
  }
  root.ctc_score = 0.0;
}

double CtcPrefixScorer::extend(const Hypothesis& parent, std::size_t token,
                               Hypothesis& child) const {
  const bool repeat = !parent.tokens.empty() && parent.tokens.back() == token;
  auto& rn = child.ctc_nonblank;
  auto& rb = child.ctc_blank;
  rn.assign(frames_, kNegInf);
  rb.assign(frames_, kNegInf);
  if (parent.tokens.empty()) rn[0] = log_probs_(0, token);
  double psi = rn[0];
  for (std::size_t t = 1; t < frames_; ++t) {
    const double phi = repeat ? parent.ctc_blank[t - 1]
                              : log_add(parent.ctc_blank[t - 1], parent.ctc_nonblank[t - 1]);
    rn[t] = log_add(rn[t - 1], phi) + log_probs_(t, token);
    rb[t] = log_add(rb[t - 1], rn[t - 1]) + log_probs_(t, blank_);
    psi = log_add(psi, phi + log_probs_(t, token));
  }
  child.ctc_score = psi;
  return psi;
}

double CtcPrefixScorer::final_score(const Hypothesis& parent) const {
  return log_add(parent.ctc_nonblank[frames_ - 1], parent.ctc_blank[frames_ - 1]);
}

BeamResult beam_search(const Tensor& ctc_log_probs, const NextTokenScorer& attention,
                       const BigramLM* lm, const Vocab& vocab, const DecodeConfig& config) {
  if (config.beam_width == 0) throw InvalidArgument("beam width must be >= 1");
  if (!(config.ctc_weight >= 0.0 && config.ctc_weight <= 1.0)) {
    throw InvalidArgument("CTC weight must lie in [0, 1]");
  }
  if (!(config.lm_weight >= 0.0)) throw InvalidArgument("LM weight must be >= 0");
  if (config.lm_weight > 0.0 && (lm == nullptr || lm->empty())) {
    throw InvalidArgument("LM weight > 0 requires a trained LM");
  }
  if (ctc_log_probs.rank() != 2 || ctc_log_probs.dim(1) != vocab.size()) {
    throw ShapeError("CTC log-probabilities " + shape_str(ctc_log_probs.shape()) +
                     " do not match vocabulary size " + std::to_string(vocab.size()));
  }
  const CtcPrefixScorer ctc(ctc_log_probs, Vocab::kBlank);
  const std::size_t max_len = config.max_length ? config.max_length : ctc.frames();
  const bool use_lm = config.lm_weight > 0.0;

  Hypothesis root;
  ctc.init(root);
  std::vector<Hypothesis> live{root};
  std::vector<Hypothesis> completed;

  for (std::size_t step = 0; step <= max_len && !live.empty(); ++step) {
    std::vector<Hypothesis> next;
    for (const Hypothesis& hyp : live) {
      const std::vector<double> att = attention(hyp.tokens);
      if (att.size() != vocab.size()) {
        throw ShapeError("attention scorer returned the wrong number of scores");
      }
      const std::size_t prev = hyp.tokens.empty() ? Vocab::kBos : hyp.tokens.back();

      Hypothesis done;
      done.tokens = hyp.tokens;
      done.att_score = hyp.att_score + att[Vocab::kEos];
      done.ctc_score = ctc.final_score(hyp);
      done.lm_score = hyp.lm_score + (use_lm ? lm->log_prob(prev, Vocab::kEos) : 0.0);
      done.score = combined_score(done.att_score, done.ctc_score, done.lm_score, config);
      completed.push_back(std::move(done));

      if (step == max_len) continue;
      for (std::size_t tok = Vocab::kFirstContent; tok < vocab.size(); ++tok) {
        Hypothesis child;
        child.tokens = hyp.tokens;
        child.tokens.push_back(tok);
        child.att_score = hyp.att_score + att[tok];
        ctc.extend(hyp, tok, child);
        child.lm_score = hyp.lm_score + (use_lm ? lm->log_prob(prev, tok) : 0.0);
        child.score = combined_score(child.att_score, child.ctc_score, child.lm_score, config);
        next.push_back(std::move(child));
      }
    }
    std::sort(next.begin(), next.end(),
              [&](const Hypothesis& a, const Hypothesis& b) { return better(a, b, config); });
    if (next.size() > config.beam_width) next.resize(config.beam_width);
    live = std::move(next);

    // Every term is a log-probability that can only decrease as a prefix
    // grows, so no live prefix can beat a completed hypothesis that already
    // scores at least as high.
    if (!config.length_normalize && !live.empty()) {
      const auto best_done = std::min_element(
          completed.begin(), completed.end(),
          [&](const Hypothesis& a, const Hypothesis& b) { return better(a, b, config); });
      if (best_done->score > live.front().score) break;
    }
  }

  std::sort(completed.begin(), completed.end(),
            [&](const Hypothesis& a, const Hypothesis& b) { return better(a, b, config); });
  BeamResult result;
  result.best = completed.front();
  result.completed = std::move(completed);
  return result;
}

}  // namespace avsr
