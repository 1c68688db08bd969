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

#include <stdexcept>
#include <string>

namespace avsr {

// Failure categories. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  kShape = 10,
  kInvalidArgument = 11,
  kInfeasibleAlignment = 12,
  kDivergence = 13,
  kIo = 14,
  kConfig = 15,
  kGradCheck = 16,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error(ErrorCategory::kShape, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCategory::kInvalidArgument, what) {}
};

// Target sequence cannot be aligned to the available number of frames.
class InfeasibleAlignment : public Error {
 public:
  explicit InfeasibleAlignment(const std::string& what)
      : Error(ErrorCategory::kInfeasibleAlignment, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ErrorCategory::kDivergence, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

}  // namespace avsr
