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

#include "avsr/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "avsr/error.hpp"
#include "avsr/io.hpp"

namespace avsr {

namespace {

constexpr const char* kMagic = "avsr-checkpoint 1";
constexpr const char* kLmName = "lm.counts";

void write_tensor(std::string& out, const std::string& name, const Tensor& t) {
  out += name;
  out += ' ';
  out += std::to_string(t.rank());
  for (std::size_t d : t.shape()) {
    out += ' ';
    out += std::to_string(d);
  }
  char buf[40];
  for (double v : t.data()) {
    std::snprintf(buf, sizeof buf, " %a", v);
    out += buf;
  }
  out += '\n';
}

struct NamedTensor {
  std::string name;
  Tensor value;
};

NamedTensor read_tensor(const std::string& line, std::size_t lineno) {
  auto fail = [&](const std::string& why) {
    return IoError("checkpoint line " + std::to_string(lineno) + ": " + why);
  };
  std::istringstream in(line);
  NamedTensor nt;
  std::size_t rank = 0;
  if (!(in >> nt.name >> rank) || rank == 0) throw fail("bad tensor header");
  Shape shape(rank);
  for (auto& d : shape)
    if (!(in >> d) || d == 0) throw fail("bad tensor shape");
  Tensor t(shape);
  std::string tok;
  for (auto& v : t.data()) {
    if (!(in >> tok)) throw fail("too few values for " + nt.name);
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw fail("bad value '" + tok + "'");
  }
  if (in >> tok) throw fail("too many values for " + nt.name);
  nt.value = std::move(t);
  return nt;
}

}  // namespace

std::string serialize_checkpoint(const ExperimentConfig& config, const ParamStore& params,
                                 const BigramLM& lm) {
  std::string out = kMagic;
  out += '\n';
  out += config_to_json(config, -1);
  out += '\n';
  for (const auto& p : params) write_tensor(out, p.name, p.value);
  if (!lm.empty()) write_tensor(out, kLmName, lm.counts());
  return out;
}

Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw IoError("not a checkpoint file");
  if (!std::getline(in, line)) throw IoError("checkpoint is missing its config");
  Checkpoint ck;
  ck.config = config_from_json(line);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    NamedTensor nt = read_tensor(line, lineno);
    if (nt.name == kLmName) {
      ck.lm_counts = std::move(nt.value);
    } else {
      if (ck.params.find(nt.name)) throw IoError("duplicate tensor '" + nt.name + "'");
      ck.params.add(nt.name, std::move(nt.value));
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ExperimentConfig& config,
                     const ParamStore& params, const BigramLM& lm) {
  atomic_write(path, serialize_checkpoint(config, params, lm));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

void assign_parameters(ParamStore& into, const ParamStore& from) {
  if (into.size() != from.size()) {
    throw ConfigError("checkpoint has " + std::to_string(from.size()) + " tensors, model expects " +
                      std::to_string(into.size()));
  }
  for (auto& p : into) {
    const auto id = from.find(p.name);
    if (!id) throw ConfigError("checkpoint is missing parameter '" + p.name + "'");
    const Tensor& v = from[*id].value;
    if (v.shape() != p.value.shape()) {
      throw ConfigError("parameter '" + p.name + "' has shape " + shape_str(v.shape()) +
                        ", model expects " + shape_str(p.value.shape()));
    }
    p.value = v;
  }
}

}  // namespace avsr
