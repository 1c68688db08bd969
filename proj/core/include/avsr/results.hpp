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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avsr {

struct ResultRow {
  std::string mode;
  std::string noise;
  double snr_db = 0.0;  // +inf for clean cells
  double wer = 0.0;     // percent
  double cer = 0.0;     // percent
  std::size_t count = 0;
  double runtime_s = 0.0;
};

// One row per (mode, noise, snr) cell.
class ResultTable {
 public:
  void add(ResultRow row);
  void merge(const ResultTable& other);
  const std::vector<ResultRow>& rows() const noexcept { return rows_; }
  const ResultRow* find(std::string_view mode, std::string_view noise, double snr_db) const;
  double wer(std::string_view mode, std::string_view noise, double snr_db) const;

  std::string to_csv() const;
  std::string to_json() const;
  static ResultTable from_json(std::string_view text);
  // Modes as rows, SNR cells as columns, one block per noise kind.
  std::string to_text() const;
  // mode,noise,snr_db,wer lines for plotting WER against SNR.
  std::string series_csv() const;

  // Equality of every field except the wall-clock runtime.
  bool same_results(const ResultTable& other) const;

 private:
  std::vector<ResultRow> rows_;
};

std::string format_snr(double snr_db);

}  // namespace avsr
