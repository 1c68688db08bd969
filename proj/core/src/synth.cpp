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

#include "avsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "avsr/error.hpp"
#include "avsr/frontend.hpp"

namespace avsr {

namespace {

std::string phoneme_symbol(std::size_t i, std::size_t count) {
  if (count <= 26) return std::string(1, static_cast<char>('a' + i));
  return "p" + std::to_string(i);
}

void fill_gaussian(Tensor& t, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data()) v = dist(rng);
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double r = u(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r < 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace

PhonemeAlphabet PhonemeAlphabet::generate(const AlphabetConfig& config) {
  if (config.visemes == 0 || config.phonemes <= config.visemes) {
    throw ConfigError("alphabet needs more phonemes than visemes (and at least one viseme)");
  }
  if (config.preferred_successors + 1 > config.phonemes) {
    throw ConfigError("too many preferred successors for the phoneme count");
  }
  PhonemeAlphabet a;
  a.config_ = config;
  Rng rng = make_rng(config.seed, "alphabet");

  std::vector<std::size_t> order(config.phonemes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  a.viseme_of_.assign(config.phonemes, 0);
  for (std::size_t i = 0; i < order.size(); ++i) a.viseme_of_[order[i]] = i % config.visemes;

  a.audio_ = Tensor({config.phonemes, config.audio_dim});
  fill_gaussian(a.audio_, rng, 1.0);
  a.visual_ = Tensor({config.visemes, config.visual_dim});
  fill_gaussian(a.visual_, rng, 1.0);

  a.transitions_ = Tensor({config.phonemes, config.phonemes});
  for (std::size_t i = 0; i < config.phonemes; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < config.phonemes; ++j) {
      if (j != i) others.push_back(j);
    }
    std::shuffle(others.begin(), others.end(), rng);
    double total = 0.0;
    for (std::size_t j = 0; j < config.phonemes; ++j) {
      if (j != i) a.transitions_(i, j) = 0.1;
    }
    for (std::size_t k = 0; k < config.preferred_successors; ++k) {
      a.transitions_(i, others[k]) += 1.0;
    }
    for (std::size_t j = 0; j < config.phonemes; ++j) total += a.transitions_(i, j);
    for (std::size_t j = 0; j < config.phonemes; ++j) a.transitions_(i, j) /= total;
  }

  for (std::size_t i = 0; i < config.phonemes; ++i) {
    a.symbols_.push_back(phoneme_symbol(i, config.phonemes));
  }
  return a;
}

AVSample generate_sample(const PhonemeAlphabet& alphabet, LengthRange lengths, std::uint64_t seed,
                         std::string id) {
  if (lengths.min < 1 || lengths.min > lengths.max) {
    throw InvalidArgument("invalid transcript length range");
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len_dist(lengths.min, lengths.max);
  const std::size_t len = len_dist(rng);

  AVSample s;
  s.id = id.empty() ? "s" + std::to_string(seed) : std::move(id);
  std::uniform_int_distribution<std::size_t> first(0, alphabet.phonemes() - 1);
  s.transcript.push_back(first(rng));
  const Tensor& tr = alphabet.transitions();
  const std::size_t p = alphabet.phonemes();
  while (s.transcript.size() < len) {
    const std::size_t prev = s.transcript.back();
    s.transcript.push_back(sample_index({tr.raw() + prev * p, p}, rng));
  }

  const std::size_t f = alphabet.audio_dim(), vd = alphabet.visual_dim();
  Tensor audio({len * kAudioFramesPerVideoFrame, f});
  Tensor video({len, vd});
  for (std::size_t t = 0; t < len; ++t) {
    const std::size_t ph = s.transcript[t];
    const std::size_t vis = alphabet.viseme_of(ph);
    for (std::size_t k = 0; k < kAudioFramesPerVideoFrame; ++k) {
      std::copy_n(alphabet.audio_templates().raw() + ph * f, f,
                  audio.raw() + (t * kAudioFramesPerVideoFrame + k) * f);
    }
    std::copy_n(alphabet.visual_templates().raw() + vis * vd, vd, video.raw() + t * vd);
  }
  for (Tensor* x : {&audio, &video}) {
    double power = 0.0;
    for (double v : x->data()) power += v * v;
    power /= static_cast<double>(x->numel());
    const double stddev = std::sqrt(power * std::pow(10.0, -kJitterSnrDb / 10.0));
    std::normal_distribution<double> jitter(0.0, stddev);
    for (auto& v : x->data()) v += jitter(rng);
  }
  s.audio.spectro = std::move(audio);
  s.visual.frames = std::move(video);
  return s;
}

std::string_view noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kClean:
      return "clean";
    case NoiseKind::kGaussian:
      return "gaussian";
    case NoiseKind::kBabble:
      return "babble";
    case NoiseKind::kOverlap:
      return "overlap";
  }
  return "clean";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "clean" || name == "none") return NoiseKind::kClean;
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "babble") return NoiseKind::kBabble;
  if (name == "overlap") return NoiseKind::kOverlap;
  throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

double mean_frame_energy(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("mean_frame_energy expects [frames, dim]");
  double total = 0.0;
  for (double v : x.data()) total += v * v;
  return total / static_cast<double>(x.dim(0));
}

double measured_snr_db(const Tensor& signal, const Tensor& noise) {
  return 10.0 * std::log10(mean_frame_energy(signal) / mean_frame_energy(noise));
}

Tensor make_noise(NoiseKind kind, std::size_t frames, std::size_t dim,
                  const PhonemeAlphabet& alphabet, Rng& rng) {
  Tensor noise({frames, dim});
  switch (kind) {
    case NoiseKind::kGaussian:
      fill_gaussian(noise, rng, 1.0);
      break;
    case NoiseKind::kBabble: {
      if (dim != alphabet.audio_dim()) throw ShapeError("babble noise width mismatch");
      // Background talkers speak the same language: phoneme streams follow
      // the transcript chain, each starting at a random phase.
      const std::size_t p = alphabet.phonemes();
      const Tensor& tr = alphabet.transitions();
      std::uniform_int_distribution<std::size_t> phon(0, p - 1);
      std::uniform_int_distribution<std::size_t> offset(0, kAudioFramesPerVideoFrame - 1);
      for (std::size_t voice = 0; voice < kBabbleVoices; ++voice) {
        std::size_t frame_in_phone = offset(rng);
        std::size_t ph = phon(rng);
        for (std::size_t s = 0; s < frames; ++s) {
          const double* tmpl = alphabet.audio_templates().raw() + ph * dim;
          for (std::size_t c = 0; c < dim; ++c) noise(s, c) += tmpl[c];
          if (++frame_in_phone == kAudioFramesPerVideoFrame) {
            frame_in_phone = 0;
            ph = sample_index({tr.raw() + ph * p, p}, rng);
          }
        }
      }
      break;
    }
    case NoiseKind::kClean:
    case NoiseKind::kOverlap:
      throw InvalidArgument("make_noise: '" + std::string(noise_kind_name(kind)) +
                            "' has no standalone noise source");
  }
  return noise;
}

Tensor scale_noise_to_snr(const Tensor& signal, const Tensor& noise, double snr_db) {
  if (std::isnan(snr_db)) throw InvalidArgument("SNR must not be NaN");
  const double ps = mean_frame_energy(signal);
  if (!(ps > 0.0)) throw InvalidArgument("cannot set an SNR against a zero-power signal");
  Tensor out = noise;
  if (snr_db == kCleanSnr) {
    out.fill(0.0);
    return out;
  }
  const double pn = mean_frame_energy(noise);
  if (!(pn > 0.0)) throw InvalidArgument("cannot scale a zero-power noise to an SNR");
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  for (auto& v : out.data()) v *= gain;
  return out;
}

AudioStream mix_noise(const AudioStream& audio, const NoiseSpec& noise,
                      const PhonemeAlphabet& alphabet) {
  if (std::isnan(noise.snr_db)) throw InvalidArgument("SNR must not be NaN");
  if (noise.kind == NoiseKind::kClean || noise.snr_db == kCleanSnr) {
    if (!(mean_frame_energy(audio.spectro) > 0.0)) {
      throw InvalidArgument("cannot mix noise into a zero-power signal");
    }
    return audio;
  }
  Rng rng(noise.seed);
  const Tensor raw =
      make_noise(noise.kind, audio.spectro.dim(0), audio.spectro.dim(1), alphabet, rng);
  const Tensor scaled = scale_noise_to_snr(audio.spectro, raw, noise.snr_db);
  AudioStream out;
  out.spectro = audio.spectro;
  out.spectro.add_inplace(scaled);
  out.snr_db = noise.snr_db;
  return out;
}

AVSample make_overlapped(const AVSample& sample, const AVSample& distractor, double snr_db) {
  if (sample.id == distractor.id) {
    throw InvalidArgument("overlap distractor must differ from the target sample");
  }
  const Tensor& target = sample.audio.spectro;
  const Tensor& other = distractor.audio.spectro;
  if (other.dim(1) != target.dim(1)) throw ShapeError("overlap: audio widths differ");
  Tensor fitted(target.shape());
  const std::size_t frames = target.dim(0), dim = target.dim(1), src = other.dim(0);
  for (std::size_t s = 0; s < frames; ++s) {
    std::copy_n(other.raw() + (s % src) * dim, dim, fitted.raw() + s * dim);
  }
  AVSample out = sample;
  if (snr_db == kCleanSnr) {
    if (!(mean_frame_energy(target) > 0.0)) {
      throw InvalidArgument("cannot mix noise into a zero-power signal");
    }
    return out;
  }
  out.audio.spectro.add_inplace(scale_noise_to_snr(target, fitted, snr_db));
  out.audio.snr_db = snr_db;
  out.noise_kind = "overlap";
  return out;
}

AVSample corrupt_sample(const AVSample& sample, const NoiseSpec& noise,
                        const PhonemeAlphabet& alphabet, const AVSample* distractor) {
  if (noise.kind == NoiseKind::kOverlap) {
    if (!distractor) throw InvalidArgument("overlap corruption needs a distractor sample");
    return make_overlapped(sample, *distractor, noise.snr_db);
  }
  AVSample out = sample;
  out.audio = mix_noise(sample.audio, noise, alphabet);
  if (noise.kind != NoiseKind::kClean && noise.snr_db != kCleanSnr) {
    out.noise_kind = std::string(noise_kind_name(noise.kind));
  }
  return out;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

std::vector<AVSample> generate_split(const PhonemeAlphabet& alphabet, Split split,
                                     std::size_t count, LengthRange lengths, std::uint64_t seed) {
  std::vector<AVSample> out;
  out.reserve(count);
  const std::string name(split_name(split));
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(generate_sample(alphabet, lengths, substream_seed(seed, "data." + name, i),
                                  name + "-" + std::to_string(i)));
  }
  return out;
}

double wer(const std::vector<std::size_t>& hyp, const std::vector<std::size_t>& ref) {
  if (ref.empty()) throw InvalidArgument("WER needs a non-empty reference");
  return static_cast<double>(levenshtein(hyp, ref)) / static_cast<double>(ref.size());
}

double cer(const std::vector<std::size_t>& hyp, const std::vector<std::size_t>& ref,
           const Vocab& vocab) {
  auto chars = [&](const std::vector<std::size_t>& tokens) {
    std::vector<char> out;
    for (auto t : tokens) {
      const auto& s = vocab.symbol(t);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  };
  const auto r = chars(ref);
  if (r.empty()) throw InvalidArgument("CER needs a non-empty reference");
  return static_cast<double>(levenshtein(chars(hyp), r)) / static_cast<double>(r.size());
}

}  // namespace avsr
