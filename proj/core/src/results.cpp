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

#include "avsr/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "avsr/error.hpp"

namespace avsr {

using nlohmann::json;

std::string format_snr(double snr_db) {
  if (std::isinf(snr_db)) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", snr_db);
  return buf;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool same_cell(const ResultRow& r, std::string_view mode, std::string_view noise, double snr) {
  return r.mode == mode && r.noise == noise && r.snr_db == snr;
}

}  // namespace

void ResultTable::add(ResultRow row) {
  if (find(row.mode, row.noise, row.snr_db)) {
    throw InvalidArgument("duplicate result cell " + row.mode + "/" + row.noise + "/" +
                          format_snr(row.snr_db));
  }
  if (!(row.wer >= 0.0)) throw InvalidArgument("WER must be non-negative");
  rows_.push_back(std::move(row));
}

void ResultTable::merge(const ResultTable& other) {
  for (const auto& r : other.rows_) add(r);
}

const ResultRow* ResultTable::find(std::string_view mode, std::string_view noise,
                                   double snr_db) const {
  for (const auto& r : rows_)
    if (same_cell(r, mode, noise, snr_db)) return &r;
  return nullptr;
}

double ResultTable::wer(std::string_view mode, std::string_view noise, double snr_db) const {
  const ResultRow* r = find(mode, noise, snr_db);
  if (!r) {
    throw InvalidArgument("no result for " + std::string(mode) + "/" + std::string(noise) + "/" +
                          format_snr(snr_db));
  }
  return r->wer;
}

std::string ResultTable::to_csv() const {
  std::string out = "mode,noise,snr_db,wer,cer,count,runtime_s\n";
  for (const auto& r : rows_) {
    out += r.mode + "," + r.noise + "," + format_snr(r.snr_db) + "," + fixed(r.wer, 4) + "," +
           fixed(r.cer, 4) + "," + std::to_string(r.count) + "," + fixed(r.runtime_s, 3) + "\n";
  }
  return out;
}

std::string ResultTable::to_json() const {
  json rows = json::array();
  for (const auto& r : rows_) {
    rows.push_back({{"mode", r.mode},
                    {"noise", r.noise},
                    {"snr_db", std::isinf(r.snr_db) ? json("clean") : json(r.snr_db)},
                    {"wer", r.wer},
                    {"cer", r.cer},
                    {"count", r.count},
                    {"runtime_s", r.runtime_s}});
  }
  return json{{"rows", rows}}.dump(2) + "\n";
}

ResultTable ResultTable::from_json(std::string_view text) {
  ResultTable t;
  try {
    const json j = json::parse(text);
    for (const auto& r : j.at("rows")) {
      ResultRow row;
      row.mode = r.at("mode").get<std::string>();
      row.noise = r.at("noise").get<std::string>();
      const json& s = r.at("snr_db");
      row.snr_db = s.is_string() ? std::numeric_limits<double>::infinity() : s.get<double>();
      row.wer = r.at("wer").get<double>();
      row.cer = r.at("cer").get<double>();
      row.count = r.at("count").get<std::size_t>();
      row.runtime_s = r.value("runtime_s", 0.0);
      t.add(std::move(row));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed result table: ") + e.what());
  }
  return t;
}

std::string ResultTable::to_text() const {
  std::vector<std::string> noises;
  for (const auto& r : rows_)
    if (std::find(noises.begin(), noises.end(), r.noise) == noises.end()) noises.push_back(r.noise);
  std::string out;
  for (const auto& noise : noises) {
    std::vector<double> snrs;
    std::vector<std::string> modes;
    for (const auto& r : rows_) {
      if (r.noise != noise) continue;
      if (std::find(snrs.begin(), snrs.end(), r.snr_db) == snrs.end()) snrs.push_back(r.snr_db);
      if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    }
    std::sort(snrs.begin(), snrs.end());
    char buf[64];
    out += "WER (%) under " + noise + " noise\n";
    std::snprintf(buf, sizeof buf, "%-16s", "mode");
    out += buf;
    for (double s : snrs) {
      const std::string label = std::isinf(s) ? "clean" : format_snr(s) + " dB";
      std::snprintf(buf, sizeof buf, " | %8s", label.c_str());
      out += buf;
    }
    out += "\n" + std::string(16 + 11 * snrs.size(), '-') + "\n";
    for (const auto& mode : modes) {
      std::snprintf(buf, sizeof buf, "%-16s", mode.c_str());
      out += buf;
      for (double s : snrs) {
        const ResultRow* r = find(mode, noise, s);
        std::snprintf(buf, sizeof buf, " | %8s", r ? fixed(r->wer, 2).c_str() : "-");
        out += buf;
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

std::string ResultTable::series_csv() const {
  std::vector<ResultRow> sorted = rows_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.mode != b.mode) return a.mode < b.mode;
    if (a.noise != b.noise) return a.noise < b.noise;
    return a.snr_db < b.snr_db;
  });
  std::string out = "mode,noise,snr_db,wer\n";
  for (const auto& r : sorted) {
    out += r.mode + "," + r.noise + "," + format_snr(r.snr_db) + "," + fixed(r.wer, 4) + "\n";
  }
  return out;
}

bool ResultTable::same_results(const ResultTable& other) const {
  if (rows_.size() != other.rows_.size()) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const ResultRow& a = rows_[i];
    const ResultRow& b = other.rows_[i];
    if (a.mode != b.mode || a.noise != b.noise || a.snr_db != b.snr_db || a.wer != b.wer ||
        a.cer != b.cer || a.count != b.count) {
      return false;
    }
  }
  return true;
}

}  // namespace avsr
