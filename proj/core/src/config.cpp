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

#include "avsr/config.hpp"

#include <cmath>

#include <json.hpp>

#include "avsr/error.hpp"
#include "avsr/io.hpp"
#include "avsr/rng.hpp"

namespace avsr {

using nlohmann::json;

namespace {

json snr_list(const std::vector<double>& v) {
  json out = json::array();
  for (double s : v) out.push_back(std::isinf(s) ? json("clean") : json(s));
  return out;
}

std::vector<double> parse_snr_list(const json& j) {
  std::vector<double> out;
  for (const auto& e : j) {
    if (e.is_string() && e.get<std::string>() == "clean") {
      out.push_back(kCleanSnr);
    } else {
      out.push_back(e.get<double>());
    }
  }
  return out;
}

json to_json(const ExperimentConfig& c) {
  const ModelConfig& m = c.model;
  json j;
  j["seed"] = c.seed;
  j["model"] = {
      {"mode", mode_name(m.mode)},
      {"d1", m.frontend.d1},
      {"d2", m.vcafe.d2},
      {"visual_dim", m.frontend.visual_dim},
      {"audio_dim", m.frontend.audio_dim},
      {"audio_hidden", m.frontend.audio_hidden},
      {"visual_kernel", m.frontend.visual_kernel},
      {"audio_kernel", m.frontend.audio_kernel},
      {"mask_kernel", m.vcafe.mask_kernel},
      {"vcafe_heads", m.vcafe.heads},
      {"vcafe_positional_encoding", m.vcafe.positional_encoding},
      {"encoder",
       {{"layers", m.encoder.layers},
        {"ff_dim", m.encoder.ff_dim},
        {"heads", m.encoder.heads},
        {"conv_kernel", m.encoder.conv_kernel},
        {"positional_encoding", m.encoder.positional_encoding}}},
      {"decoder",
       {{"layers", m.decoder.layers}, {"ff_dim", m.decoder.ff_dim}, {"heads", m.decoder.heads}}},
  };
  const DataConfig& d = c.data;
  j["data"] = {{"phonemes", d.alphabet.phonemes},
               {"visemes", d.alphabet.visemes},
               {"preferred_successors", d.alphabet.preferred_successors},
               {"min_length", d.lengths.min},
               {"max_length", d.lengths.max},
               {"train_samples", d.train_samples},
               {"val_samples", d.val_samples},
               {"test_samples", d.test_samples},
               {"dir", d.dir}};
  const TrainConfig& t = c.train;
  j["train"] = {{"loss_weight", t.loss_weight},
                {"lr", t.optimizer.lr},
                {"beta1", t.optimizer.beta1},
                {"beta2", t.optimizer.beta2},
                {"eps", t.optimizer.eps},
                {"weight_decay", t.optimizer.weight_decay},
                {"batch_size", t.batch_size},
                {"epochs", t.epochs},
                {"grad_clip", t.grad_clip},
                {"noise", noise_kind_name(t.noise)},
                {"snr_db", snr_list(t.snr_db)},
                {"clean_fraction", t.clean_fraction},
                {"time_mask", t.time_mask}};
  j["decode"] = {{"ctc_weight", c.decode.ctc_weight},
                 {"lm_weight", c.decode.lm_weight},
                 {"beam_width", c.decode.beam_width},
                 {"max_length", c.decode.max_length},
                 {"length_normalize", c.decode.length_normalize}};
  json kinds = json::array();
  for (NoiseKind k : c.eval.noise) kinds.push_back(noise_kind_name(k));
  j["eval"] = {{"noise", kinds}, {"snr_db", snr_list(c.eval.snr_db)}, {"threads", c.eval.threads}};
  return j;
}

ExperimentConfig from_full_json(const json& j) {
  ExperimentConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  const json& m = j.at("model");
  c.model.mode = parse_mode(m.at("mode").get<std::string>());
  c.model.frontend.d1 = m.at("d1").get<std::size_t>();
  c.model.vcafe.d2 = m.at("d2").get<std::size_t>();
  c.model.frontend.visual_dim = m.at("visual_dim").get<std::size_t>();
  c.model.frontend.audio_dim = m.at("audio_dim").get<std::size_t>();
  c.model.frontend.audio_hidden = m.at("audio_hidden").get<std::size_t>();
  c.model.frontend.visual_kernel = m.at("visual_kernel").get<std::size_t>();
  c.model.frontend.audio_kernel = m.at("audio_kernel").get<std::size_t>();
  c.model.vcafe.mask_kernel = m.at("mask_kernel").get<std::size_t>();
  c.model.vcafe.heads = m.at("vcafe_heads").get<std::size_t>();
  c.model.vcafe.positional_encoding = m.at("vcafe_positional_encoding").get<bool>();
  const json& e = m.at("encoder");
  c.model.encoder.layers = e.at("layers").get<std::size_t>();
  c.model.encoder.ff_dim = e.at("ff_dim").get<std::size_t>();
  c.model.encoder.heads = e.at("heads").get<std::size_t>();
  c.model.encoder.conv_kernel = e.at("conv_kernel").get<std::size_t>();
  c.model.encoder.positional_encoding = e.at("positional_encoding").get<bool>();
  const json& dec = m.at("decoder");
  c.model.decoder.layers = dec.at("layers").get<std::size_t>();
  c.model.decoder.ff_dim = dec.at("ff_dim").get<std::size_t>();
  c.model.decoder.heads = dec.at("heads").get<std::size_t>();

  const json& d = j.at("data");
  c.data.alphabet.phonemes = d.at("phonemes").get<std::size_t>();
  c.data.alphabet.visemes = d.at("visemes").get<std::size_t>();
  c.data.alphabet.preferred_successors = d.at("preferred_successors").get<std::size_t>();
  c.data.lengths.min = d.at("min_length").get<std::size_t>();
  c.data.lengths.max = d.at("max_length").get<std::size_t>();
  c.data.train_samples = d.at("train_samples").get<std::size_t>();
  c.data.val_samples = d.at("val_samples").get<std::size_t>();
  c.data.test_samples = d.at("test_samples").get<std::size_t>();
  c.data.dir = d.at("dir").get<std::string>();

  const json& t = j.at("train");
  c.train.loss_weight = t.at("loss_weight").get<double>();
  c.train.optimizer.lr = t.at("lr").get<double>();
  c.train.optimizer.beta1 = t.at("beta1").get<double>();
  c.train.optimizer.beta2 = t.at("beta2").get<double>();
  c.train.optimizer.eps = t.at("eps").get<double>();
  c.train.optimizer.weight_decay = t.at("weight_decay").get<double>();
  c.train.batch_size = t.at("batch_size").get<std::size_t>();
  c.train.epochs = t.at("epochs").get<std::size_t>();
  c.train.grad_clip = t.at("grad_clip").get<double>();
  c.train.noise = parse_noise_kind(t.at("noise").get<std::string>());
  c.train.snr_db = parse_snr_list(t.at("snr_db"));
  c.train.clean_fraction = t.at("clean_fraction").get<double>();
  c.train.time_mask = t.at("time_mask").get<std::size_t>();

  const json& dc = j.at("decode");
  c.decode.ctc_weight = dc.at("ctc_weight").get<double>();
  c.decode.lm_weight = dc.at("lm_weight").get<double>();
  c.decode.beam_width = dc.at("beam_width").get<std::size_t>();
  c.decode.max_length = dc.at("max_length").get<std::size_t>();
  c.decode.length_normalize = dc.at("length_normalize").get<bool>();

  const json& ev = j.at("eval");
  c.eval.noise.clear();
  for (const auto& k : ev.at("noise")) c.eval.noise.push_back(parse_noise_kind(k.get<std::string>()));
  c.eval.snr_db = parse_snr_list(ev.at("snr_db"));
  c.eval.threads = ev.at("threads").get<std::size_t>();
  return c;
}

// Rejects keys of `user` that the defaults do not have.
void check_known_keys(const json& user, const json& defaults, const std::string& path) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + here + "'");
    if (defaults[key].is_object()) {
      if (!value.is_object()) throw ConfigError("config key '" + here + "' must be an object");
      check_known_keys(value, defaults[key], here);
    }
  }
}

ExperimentConfig parse_merged(const json& user) {
  const json defaults = to_json(ExperimentConfig{});
  check_known_keys(user, defaults, "");
  json merged = defaults;
  merged.merge_patch(user);
  try {
    ExperimentConfig c = from_full_json(merged);
    finalize(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
}

}  // namespace

void finalize(ExperimentConfig& c) {
  c.model.encoder.dim = c.model.frontend.d1;
  c.model.decoder.dim = c.model.frontend.d1;
  c.model.vcafe.d1 = c.model.frontend.d1;
  c.data.alphabet.audio_dim = c.model.frontend.audio_dim;
  c.data.alphabet.visual_dim = c.model.frontend.visual_dim;
  c.data.alphabet.seed = substream_seed(c.seed, "alphabet");
  validate(c.model);
  if (c.data.lengths.min == 0 || c.data.lengths.min > c.data.lengths.max) {
    throw ConfigError("data lengths need 1 <= min_length <= max_length");
  }
  if (c.data.alphabet.visemes == 0 || c.data.alphabet.phonemes < 2 * c.data.alphabet.visemes) {
    throw ConfigError("every viseme needs at least two phonemes");
  }
  if (c.data.test_samples < 2 || c.data.val_samples == 0 || c.data.train_samples < 2) {
    throw ConfigError("splits need at least 2 train, 1 val and 2 test samples");
  }
  if (c.train.loss_weight < 0.0 || c.train.loss_weight > 1.0) {
    throw ConfigError("train.loss_weight must lie in [0, 1]");
  }
  if (c.train.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (!(c.train.optimizer.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (c.train.clean_fraction < 0.0 || c.train.clean_fraction > 1.0) {
    throw ConfigError("train.clean_fraction must lie in [0, 1]");
  }
  if (c.train.noise != NoiseKind::kClean && c.train.snr_db.empty()) {
    throw ConfigError("train.snr_db must list at least one SNR");
  }
  if (c.decode.beam_width == 0) throw ConfigError("decode.beam_width must be positive");
  if (c.decode.ctc_weight < 0.0 || c.decode.ctc_weight > 1.0) {
    throw ConfigError("decode.ctc_weight must lie in [0, 1]");
  }
  if (c.decode.lm_weight < 0.0) throw ConfigError("decode.lm_weight must be >= 0");
  for (double s : c.train.snr_db)
    if (std::isnan(s)) throw ConfigError("train.snr_db contains NaN");
  for (double s : c.eval.snr_db)
    if (std::isnan(s)) throw ConfigError("eval.snr_db contains NaN");
}

std::string config_to_json(const ExperimentConfig& config, int indent) {
  return to_json(config).dump(indent);
}

ExperimentConfig config_from_json(std::string_view text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  return parse_merged(user);
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_file(path)); }

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' must look like key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json patch = json::object();
  json* cursor = &patch;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
    if (dot == std::string::npos) {
      (*cursor)[part] = value;
      break;
    }
    cursor = &(*cursor)[part];
    start = dot + 1;
  }
  json current = to_json(config);
  check_known_keys(patch, current, "");
  current.merge_patch(patch);
  try {
    ExperimentConfig c = from_full_json(current);
    finalize(c);
    config = c;
  } catch (const json::exception& e) {
    throw ConfigError("invalid value for '" + key + "': " + e.what());
  }
}

}  // namespace avsr
