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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avsr/rng.hpp"
#include "avsr/sample.hpp"
#include "avsr/tensor.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

struct AlphabetConfig {
  std::size_t phonemes = 12;
  std::size_t visemes = 6;
  std::size_t audio_dim = 20;
  std::size_t visual_dim = 16;
  // Likely successors per phoneme in the transcript Markov chain.
  std::size_t preferred_successors = 3;
  std::uint64_t seed = 1234;
};

// Synthetic phoneme inventory with a many-to-one phoneme -> viseme map.
// Phonemes that share a viseme have identical visual templates and distinct
// audio templates.
class PhonemeAlphabet {
 public:
  static PhonemeAlphabet generate(const AlphabetConfig& config);

  std::size_t phonemes() const noexcept { return viseme_of_.size(); }
  std::size_t visemes() const noexcept { return visual_.dim(0); }
  std::size_t audio_dim() const noexcept { return audio_.dim(1); }
  std::size_t visual_dim() const noexcept { return visual_.dim(1); }
  std::size_t viseme_of(std::size_t phoneme) const { return viseme_of_.at(phoneme); }

  // [phonemes, audio_dim] and [visemes, visual_dim]
  const Tensor& audio_templates() const noexcept { return audio_; }
  const Tensor& visual_templates() const noexcept { return visual_; }
  // Row-stochastic [phonemes, phonemes] successor distribution, zero diagonal.
  const Tensor& transitions() const noexcept { return transitions_; }

  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  Vocab vocab() const { return Vocab(symbols_); }
  const AlphabetConfig& config() const noexcept { return config_; }

 private:
  AlphabetConfig config_;
  std::vector<std::size_t> viseme_of_;
  Tensor audio_;
  Tensor visual_;
  Tensor transitions_;
  std::vector<std::string> symbols_;
};

struct LengthRange {
  std::size_t min = 4;
  std::size_t max = 12;
};

// Jitter level added to clean templates, in dB below the template power.
inline constexpr double kJitterSnrDb = 40.0;

// Clean sample: T phonemes, one video frame and four audio frames each.
AVSample generate_sample(const PhonemeAlphabet& alphabet, LengthRange lengths, std::uint64_t seed,
                         std::string id = {});

enum class NoiseKind { kClean, kGaussian, kBabble, kOverlap };

std::string_view noise_kind_name(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

inline constexpr double kCleanSnr = std::numeric_limits<double>::infinity();
// Voices summed into the babble surrogate.
inline constexpr std::size_t kBabbleVoices = 3;

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kClean;
  double snr_db = kCleanSnr;
  std::uint64_t seed = 0;
};

// Mean squared frame energy: average over frames of the squared L2 norm.
double mean_frame_energy(const Tensor& x);
// 10 log10(P_signal / P_noise)
double measured_snr_db(const Tensor& signal, const Tensor& noise);

// Unscaled noise of the given kind, shaped like [frames, dim]. Babble sums
// kBabbleVoices random phoneme streams.
Tensor make_noise(NoiseKind kind, std::size_t frames, std::size_t dim,
                  const PhonemeAlphabet& alphabet, Rng& rng);

// Copy of `noise` scaled so that signal / noise power matches snr_db.
Tensor scale_noise_to_snr(const Tensor& signal, const Tensor& noise, double snr_db);

// Adds gaussian or babble noise at the requested SNR. snr_db = +inf returns
// the input unchanged.
AudioStream mix_noise(const AudioStream& audio, const NoiseSpec& noise,
                      const PhonemeAlphabet& alphabet);

// Overlaps a competing utterance onto the target audio; video and transcript
// stay the target's. The distractor is trimmed or tiled to the target length.
AVSample make_overlapped(const AVSample& sample, const AVSample& distractor, double snr_db);

// Applies a noise spec to a sample; overlap uses `distractor`.
AVSample corrupt_sample(const AVSample& sample, const NoiseSpec& noise,
                        const PhonemeAlphabet& alphabet, const AVSample* distractor = nullptr);

enum class Split { kTrain, kVal, kTest };
std::string_view split_name(Split split);

// Deterministic clean samples of one split; each split draws from its own
// seed substream.
std::vector<AVSample> generate_split(const PhonemeAlphabet& alphabet, Split split,
                                     std::size_t count, LengthRange lengths, std::uint64_t seed);

// Edit distance with unit costs.
template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b);

// levenshtein(hyp, ref) / |ref|; throws on an empty reference.
double wer(const std::vector<std::size_t>& hyp, const std::vector<std::size_t>& ref);
// Same over characters of the rendered symbols (spaces ignored).
double cer(const std::vector<std::size_t>& hyp, const std::vector<std::size_t>& ref,
           const Vocab& vocab);

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace avsr
