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

#include "avsr/vocab.hpp"

#include <sstream>

#include "avsr/error.hpp"

namespace avsr {

Vocab::Vocab(std::vector<std::string> content_symbols) {
  symbols_ = {"<blank>", "<bos>", "<eos>"};
  for (auto& s : content_symbols) {
    if (s.empty() || s.find(' ') != std::string::npos) {
      throw InvalidArgument("vocab symbols must be non-empty and contain no spaces");
    }
    symbols_.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], i).second) {
      throw InvalidArgument("duplicate vocab symbol '" + symbols_[i] + "'");
    }
  }
}

const std::string& Vocab::symbol(std::size_t token) const {
  if (token >= symbols_.size()) throw InvalidArgument("token id out of range");
  return symbols_[token];
}

std::optional<std::size_t> Vocab::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocab::token_of_content(std::size_t i) const {
  if (i >= content_size()) throw InvalidArgument("content index out of range");
  return i + kFirstContent;
}

std::size_t Vocab::content_of_token(std::size_t token) const {
  if (!is_content(token)) throw InvalidArgument("token is not a content symbol");
  return token - kFirstContent;
}

std::vector<std::size_t> Vocab::tokens_of_content(std::span<const std::size_t> content) const {
  std::vector<std::size_t> out;
  out.reserve(content.size());
  for (auto c : content) out.push_back(token_of_content(c));
  return out;
}

std::vector<std::size_t> Vocab::content_of_tokens(std::span<const std::size_t> tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (auto t : tokens) out.push_back(content_of_token(t));
  return out;
}

std::string Vocab::render(std::span<const std::size_t> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += symbol(tokens[i]);
  }
  return out;
}

std::vector<std::size_t> Vocab::parse(std::string_view text) const {
  std::vector<std::size_t> out;
  std::istringstream is{std::string(text)};
  std::string word;
  while (is >> word) {
    auto id = find(word);
    if (!id || !is_content(*id)) throw InvalidArgument("unknown token '" + word + "'");
    out.push_back(*id);
  }
  return out;
}

}  // namespace avsr
