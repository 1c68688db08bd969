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

#include "avsr/sample_io.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "avsr/error.hpp"
#include "avsr/io.hpp"

namespace avsr {

using nlohmann::json;

namespace {

json matrix_json(const Tensor& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.dim(0); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.dim(1); ++c) row.push_back(t(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Tensor matrix_from_json(const json& rows, const char* field) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
    throw IoError(std::string("sample field '") + field + "' must be a non-empty matrix");
  }
  const std::size_t n = rows.size(), d = rows[0].size();
  Tensor t({n, d});
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != d) throw IoError(std::string("ragged rows in '") + field + "'");
    for (std::size_t c = 0; c < d; ++c) {
      const double v = rows[r][c].get<double>();
      if (!std::isfinite(v)) throw IoError(std::string("non-finite value in '") + field + "'");
      t(r, c) = v;
    }
  }
  return t;
}

}  // namespace

std::string sample_to_json(const AVSample& sample, const Vocab& vocab) {
  json j;
  j["id"] = sample.id;
  j["transcript"] = vocab.render(vocab.tokens_of_content(sample.transcript));
  j["snr_db"] = sample.audio.snr_db ? json(*sample.audio.snr_db) : json(nullptr);
  j["noise_kind"] = sample.noise_kind;
  j["visual"] = matrix_json(sample.visual.frames);
  j["audio"] = matrix_json(sample.audio.spectro);
  return j.dump();
}

AVSample sample_from_json(const std::string& line, const Vocab& vocab) {
  try {
    const json j = json::parse(line);
    AVSample s;
    s.id = j.at("id").get<std::string>();
    s.transcript = vocab.content_of_tokens(vocab.parse(j.at("transcript").get<std::string>()));
    if (j.contains("snr_db") && !j["snr_db"].is_null()) s.audio.snr_db = j["snr_db"].get<double>();
    s.noise_kind = j.value("noise_kind", std::string("clean"));
    s.visual.frames = matrix_from_json(j.at("visual"), "visual");
    s.audio.spectro = matrix_from_json(j.at("audio"), "audio");
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed sample record: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("malformed sample record: ") + e.what());
  }
}

void write_samples(const std::filesystem::path& path, const std::vector<AVSample>& samples,
                   const Vocab& vocab) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s, vocab);
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<AVSample> read_samples(const std::filesystem::path& path, const Vocab& vocab) {
  std::istringstream in(read_file(path));
  std::vector<AVSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(line, vocab));
    } catch (const IoError& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace avsr
