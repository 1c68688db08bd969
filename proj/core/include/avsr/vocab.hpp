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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace avsr {

// Token inventory shared by the CTC head, the attention decoder and the LM.
// Layout: 0 = blank, 1 = bos, 2 = eos, then content symbols in order.
class Vocab {
 public:
  static constexpr std::size_t kBlank = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kFirstContent = 3;

  // Special symbols only.
  Vocab() : Vocab(std::vector<std::string>{}) {}
  explicit Vocab(std::vector<std::string> content_symbols);

  std::size_t size() const noexcept { return symbols_.size(); }
  std::size_t content_size() const noexcept { return symbols_.size() - kFirstContent; }
  bool is_content(std::size_t token) const noexcept {
    return token >= kFirstContent && token < symbols_.size();
  }

  const std::string& symbol(std::size_t token) const;
  std::optional<std::size_t> find(std::string_view symbol) const;

  // Content symbol i <-> token id.
  std::size_t token_of_content(std::size_t i) const;
  std::size_t content_of_token(std::size_t token) const;
  std::vector<std::size_t> tokens_of_content(std::span<const std::size_t> content) const;
  std::vector<std::size_t> content_of_tokens(std::span<const std::size_t> tokens) const;

  // Space-separated rendering of content tokens.
  std::string render(std::span<const std::size_t> tokens) const;
  // Inverse of render(); throws on unknown symbols.
  std::vector<std::size_t> parse(std::string_view text) const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace avsr
