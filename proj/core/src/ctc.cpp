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

#include "avsr/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

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

std::vector<std::size_t> interleave(std::span<const std::size_t> labels, std::size_t blank) {
  std::vector<std::size_t> ext;
  ext.reserve(2 * labels.size() + 1);
  ext.push_back(blank);
  for (auto l : labels) {
    if (l == blank) throw InvalidArgument("CTC labels must not contain the blank symbol");
    ext.push_back(l);
    ext.push_back(blank);
  }
  return ext;
}

void check_feasible(std::size_t frames, std::span<const std::size_t> labels) {
  const std::size_t need = ctc_min_frames(labels);
  if (frames < need) {
    throw InfeasibleAlignment("CTC target of length " + std::to_string(labels.size()) + " needs " +
                              std::to_string(need) + " frames, only " + std::to_string(frames) +
                              " available");
  }
}

// alpha[t][s] in log space.
std::vector<double> forward_table(const Tensor& lp, const std::vector<std::size_t>& ext) {
  const std::size_t t_len = lp.dim(0), v = lp.dim(1), s_len = ext.size();
  std::vector<double> alpha(t_len * s_len, kNegInf);
  alpha[0] = lp[ext[0]];
  if (s_len > 1) alpha[1] = lp[ext[1]];
  for (std::size_t t = 1; t < t_len; ++t) {
    const double* row = lp.raw() + t * v;
    for (std::size_t s = 0; s < s_len; ++s) {
      double a = alpha[(t - 1) * s_len + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * s_len + s - 1]);
      if (s >= 2 && ext[s] != ext[s - 2]) a = log_add(a, alpha[(t - 1) * s_len + s - 2]);
      alpha[t * s_len + s] = a == kNegInf ? kNegInf : a + row[ext[s]];
    }
  }
  return alpha;
}

std::vector<double> backward_table(const Tensor& lp, const std::vector<std::size_t>& ext) {
  const std::size_t t_len = lp.dim(0), v = lp.dim(1), s_len = ext.size();
  std::vector<double> beta(t_len * s_len, kNegInf);
  const std::size_t last = t_len - 1;
  beta[last * s_len + s_len - 1] = lp[last * v + ext[s_len - 1]];
  if (s_len > 1) beta[last * s_len + s_len - 2] = lp[last * v + ext[s_len - 2]];
  for (std::size_t t = last; t-- > 0;) {
    const double* row = lp.raw() + t * v;
    for (std::size_t s = 0; s < s_len; ++s) {
      double b = beta[(t + 1) * s_len + s];
      if (s + 1 < s_len) b = log_add(b, beta[(t + 1) * s_len + s + 1]);
      if (s + 2 < s_len && ext[s] != ext[s + 2]) b = log_add(b, beta[(t + 1) * s_len + s + 2]);
      beta[t * s_len + s] = b == kNegInf ? kNegInf : b + row[ext[s]];
    }
  }
  return beta;
}

double total_from_alpha(const std::vector<double>& alpha, std::size_t t_len, std::size_t s_len) {
  const std::size_t last = (t_len - 1) * s_len;
  double total = alpha[last + s_len - 1];
  if (s_len > 1) total = log_add(total, alpha[last + s_len - 2]);
  return total;
}

Tensor log_softmax_rows(const Tensor& z) {
  const std::size_t t_len = z.dim(0), v = z.dim(1);
  Tensor out({t_len, v});
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* row = z.raw() + t * v;
    const double mx = *std::max_element(row, row + v);
    double total = 0.0;
    for (std::size_t k = 0; k < v; ++k) total += std::exp(row[k] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t k = 0; k < v; ++k) out(t, k) = row[k] - lse;
  }
  return out;
}

void check_input(const Tensor& t, std::span<const std::size_t> labels) {
  if (t.rank() != 2) throw ShapeError("CTC expects [T, V] scores, got " + shape_str(t.shape()));
  for (auto l : labels) {
    if (l >= t.dim(1)) throw InvalidArgument("CTC label out of vocabulary range");
  }
}

}  // namespace

std::size_t ctc_min_frames(std::span<const std::size_t> labels) {
  std::size_t need = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++need;
  }
  return need;
}

double ctc_log_likelihood(const Tensor& log_probs, std::span<const std::size_t> labels,
                          std::size_t blank) {
  check_input(log_probs, labels);
  check_feasible(log_probs.dim(0), labels);
  const auto ext = interleave(labels, blank);
  const auto alpha = forward_table(log_probs, ext);
  return total_from_alpha(alpha, log_probs.dim(0), ext.size());
}

Var ctc_loss(Var logits, std::span<const std::size_t> labels, std::size_t blank) {
  const Tensor& z = logits.value();
  check_input(z, labels);
  check_feasible(z.dim(0), labels);
  const auto ext = interleave(labels, blank);
  Tensor lp = log_softmax_rows(z);
  const auto alpha = forward_table(lp, ext);
  const double log_p = total_from_alpha(alpha, lp.dim(0), ext.size());
  if (std::isnan(log_p)) {
    // Non-finite logits; callers detect the NaN loss.
    return logits.graph->constant(Tensor::scalar(log_p));
  }
  if (!std::isfinite(log_p)) {
    throw InfeasibleAlignment("CTC likelihood underflowed to zero");
  }
  const NodeId iz = logits.id;
  return logits.graph->record(
      "ctc_loss", Tensor::scalar(-log_p), {iz},
      [iz, ext, alpha, lp = std::move(lp), log_p](Graph& g, NodeId o) {
        Tensor* dz = g.accum(iz);
        if (!dz) return;
        const double d = g.grad(o)[0];
        const auto beta = backward_table(lp, ext);
        const std::size_t t_len = lp.dim(0), v = lp.dim(1), s_len = ext.size();
        std::vector<double> occupancy(v);
        for (std::size_t t = 0; t < t_len; ++t) {
          std::fill(occupancy.begin(), occupancy.end(), kNegInf);
          for (std::size_t s = 0; s < s_len; ++s) {
            // alpha and beta both include the emission at (t, s).
            const double ab = alpha[t * s_len + s] + beta[t * s_len + s];
            occupancy[ext[s]] = log_add(occupancy[ext[s]], ab);
          }
          for (std::size_t k = 0; k < v; ++k) {
            const double p = std::exp(lp(t, k));
            const double gamma =
                occupancy[k] == kNegInf ? 0.0 : std::exp(occupancy[k] - lp(t, k) - log_p);
            (*dz)(t, k) += d * (p - gamma);
          }
        }
      });
}

}  // namespace avsr
