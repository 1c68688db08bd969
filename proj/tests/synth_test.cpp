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
#include <set>

#include "avsr/error.hpp"
#include "avsr/synth.hpp"

namespace avsr {
namespace {

const PhonemeAlphabet& alphabet() {
  static const PhonemeAlphabet a = PhonemeAlphabet::generate({});
  return a;
}

Tensor difference(const Tensor& a, const Tensor& b) {
  Tensor d = a;
  d.add_inplace(b, -1.0);
  return d;
}

TEST(Alphabet, VisemesAreSharedByAtLeastTwoPhonemes) {
  const auto& a = alphabet();
  ASSERT_EQ(a.phonemes(), 12u);
  ASSERT_EQ(a.visemes(), 6u);
  std::vector<std::size_t> members(a.visemes(), 0);
  for (std::size_t p = 0; p < a.phonemes(); ++p) ++members[a.viseme_of(p)];
  for (std::size_t m : members) EXPECT_GE(m, 2u);
}

TEST(Alphabet, HomophenesHaveDistinctAudio) {
  const auto& a = alphabet();
  for (std::size_t p = 0; p < a.phonemes(); ++p) {
    for (std::size_t q = p + 1; q < a.phonemes(); ++q) {
      if (a.viseme_of(p) != a.viseme_of(q)) continue;
      double d = 0.0;
      for (std::size_t f = 0; f < a.audio_dim(); ++f) {
        d += std::abs(a.audio_templates()(p, f) - a.audio_templates()(q, f));
      }
      EXPECT_GT(d, 1.0);
    }
  }
}

TEST(Alphabet, TransitionsAreStochasticWithoutSelfLoops) {
  const Tensor& tr = alphabet().transitions();
  for (std::size_t p = 0; p < tr.dim(0); ++p) {
    double total = 0.0;
    for (std::size_t q = 0; q < tr.dim(1); ++q) total += tr(p, q);
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(tr(p, p), 0.0);
  }
}

TEST(Alphabet, DeterministicForSeed) {
  const auto a = PhonemeAlphabet::generate({});
  const auto b = PhonemeAlphabet::generate({});
  EXPECT_EQ(a.audio_templates(), b.audio_templates());
  EXPECT_EQ(a.visual_templates(), b.visual_templates());
  const auto c = PhonemeAlphabet::generate({.seed = 99});
  EXPECT_NE(a.audio_templates(), c.audio_templates());
}

TEST(Sample, StreamLengthsFollowTranscript) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    AVSample s = generate_sample(alphabet(), {}, seed, "x");
    const std::size_t L = s.transcript.size();
    EXPECT_GE(L, 4u);
    EXPECT_LE(L, 12u);
    EXPECT_EQ(s.visual.length(), L);
    EXPECT_EQ(s.audio.length(), 4 * L);
    EXPECT_EQ(s.visual.frames.dim(1), 16u);
    EXPECT_EQ(s.audio.spectro.dim(1), 20u);
    for (std::size_t i = 0; i + 1 < L; ++i) EXPECT_NE(s.transcript[i], s.transcript[i + 1]);
    for (std::size_t p : s.transcript) EXPECT_LT(p, 12u);
  }
}

TEST(Sample, ClosestTemplateRecoversTranscript) {
  // Jitter at 40 dB is small enough that nearest-template decoding of the
  // clean audio is exact.
  const auto& a = alphabet();
  AVSample s = generate_sample(a, {}, 5);
  for (std::size_t i = 0; i < s.transcript.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t p = 0; p < a.phonemes(); ++p) {
      double d = 0.0;
      for (std::size_t f = 0; f < a.audio_dim(); ++f) {
        const double e = s.audio.spectro(4 * i, f) - a.audio_templates()(p, f);
        d += e * e;
      }
      if (d < best_d) best_d = d, best = p;
    }
    EXPECT_EQ(best, s.transcript[i]);
  }
}

TEST(Sample, DeterministicForSeed) {
  AVSample a = generate_sample(alphabet(), {}, 42, "x");
  AVSample b = generate_sample(alphabet(), {}, 42, "x");
  EXPECT_EQ(a.audio.spectro, b.audio.spectro);
  EXPECT_EQ(a.visual.frames, b.visual.frames);
  EXPECT_EQ(a.transcript, b.transcript);
}

TEST(Noise, EnergyAndSnrDefinitions) {
  Tensor s = Tensor::matrix({{3, 4}, {0, 0}});
  EXPECT_DOUBLE_EQ(mean_frame_energy(s), 12.5);
  Tensor n = Tensor::matrix({{0.3, 0.4}, {0, 0}});
  EXPECT_NEAR(measured_snr_db(s, n), 20.0, 1e-12);
}

TEST(Noise, CalibratedWithinHundredthOfDecibel) {
  const auto& a = alphabet();
  std::uint64_t seed = 0;
  for (NoiseKind kind : {NoiseKind::kGaussian, NoiseKind::kBabble}) {
    for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
      for (int i = 0; i < 100; ++i) {
        AVSample s = generate_sample(a, {}, ++seed);
        AudioStream mixed = mix_noise(s.audio, {kind, snr, seed * 31}, a);
        const double measured =
            measured_snr_db(s.audio.spectro, difference(mixed.spectro, s.audio.spectro));
        EXPECT_NEAR(measured, snr, 0.01);
        ASSERT_TRUE(mixed.snr_db.has_value());
        EXPECT_EQ(*mixed.snr_db, snr);
      }
    }
  }
}

TEST(Noise, CleanLeavesAudioUnchanged) {
  AVSample s = generate_sample(alphabet(), {}, 3);
  EXPECT_EQ(mix_noise(s.audio, {NoiseKind::kClean, 0.0, 1}, alphabet()).spectro, s.audio.spectro);
  EXPECT_EQ(mix_noise(s.audio, {NoiseKind::kBabble, kCleanSnr, 1}, alphabet()).spectro,
            s.audio.spectro);
}

TEST(Noise, ZeroPowerSignalRejected) {
  AudioStream silent{Tensor({8, 20}, 0.0), std::nullopt};
  EXPECT_THROW(mix_noise(silent, {NoiseKind::kGaussian, 0.0, 1}, alphabet()), InvalidArgument);
}

TEST(Noise, BabbleDiffersFromGaussian) {
  Rng r1(1), r2(1);
  Tensor babble = make_noise(NoiseKind::kBabble, 40, 20, alphabet(), r1);
  Tensor gauss = make_noise(NoiseKind::kGaussian, 40, 20, alphabet(), r2);
  EXPECT_NE(babble, gauss);
  EXPECT_TRUE(babble.all_finite());
}

TEST(Noise, KindNames) {
  EXPECT_EQ(parse_noise_kind("babble"), NoiseKind::kBabble);
  EXPECT_EQ(parse_noise_kind("none"), NoiseKind::kClean);
  EXPECT_EQ(noise_kind_name(NoiseKind::kOverlap), "overlap");
  EXPECT_THROW(parse_noise_kind("pink"), ConfigError);
}

TEST(Overlap, KeepsTargetVideoAndTranscript) {
  const auto& a = alphabet();
  AVSample target = generate_sample(a, {}, 10, "t");
  AVSample other = generate_sample(a, {}, 11, "o");
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
    AVSample mixed = make_overlapped(target, other, snr);
    EXPECT_EQ(mixed.visual.frames, target.visual.frames);
    EXPECT_EQ(mixed.transcript, target.transcript);
    EXPECT_EQ(mixed.noise_kind, "overlap");
    EXPECT_NEAR(measured_snr_db(target.audio.spectro,
                                difference(mixed.audio.spectro, target.audio.spectro)),
                snr, 0.01);
  }
  EXPECT_THROW(make_overlapped(target, target, 0.0), InvalidArgument);
  EXPECT_THROW(corrupt_sample(target, {NoiseKind::kOverlap, 0.0, 1}, a), InvalidArgument);
}

TEST(Splits, DisjointAndDeterministic) {
  const auto& a = alphabet();
  auto train = generate_split(a, Split::kTrain, 50, {}, 7);
  auto test = generate_split(a, Split::kTest, 50, {}, 7);
  EXPECT_EQ(train[0].id, "train-0");
  EXPECT_EQ(test[49].id, "test-49");
  std::set<std::vector<double>> seen;
  for (const auto& s : train) seen.insert({s.audio.spectro.data().begin(), s.audio.spectro.data().end()});
  for (const auto& s : test) {
    EXPECT_FALSE(seen.count({s.audio.spectro.data().begin(), s.audio.spectro.data().end()}));
  }
  auto again = generate_split(a, Split::kTrain, 50, {}, 7);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(train[i].audio.spectro, again[i].audio.spectro);
}

TEST(Metrics, WordErrorRate) {
  EXPECT_NEAR(wer({1, 9, 3}, {1, 2, 3}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(wer({}, {1, 2, 3}), 1.0);
  EXPECT_EQ(wer({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(wer({4, 5, 6, 7, 8, 9}, {1, 2, 3}), 2.0);
  EXPECT_THROW(wer({1}, {}), InvalidArgument);
}

TEST(Metrics, LevenshteinProperties) {
  const std::vector<int> a{1, 2, 3, 4}, b{2, 3, 5}, c{};
  EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
  EXPECT_EQ(levenshtein(a, c), 4u);
  EXPECT_EQ(levenshtein(a, a), 0u);
  EXPECT_EQ(levenshtein(a, b), 2u);
  EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
}

TEST(Metrics, CharacterErrorRate) {
  Vocab v({"ab", "c"});
  // "ab c" vs "c c": chars a,b,c vs c,c -> 2 edits over 3 chars.
  EXPECT_NEAR(cer({4, 4}, {3, 4}, v), 2.0 / 3.0, 1e-15);
}

}  // namespace
}  // namespace avsr
