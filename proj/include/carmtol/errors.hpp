// Copyright 2026 The carmtol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace carmtol {

// Base of every error raised by the library. Callers that only need to know
// "the trial failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// geometry
class InvalidCamera : public Error { using Error::Error; };
class BehindCamera : public Error { using Error::Error; };
class InvalidRigConfig : public Error { using Error::Error; };

// solvers
class DegenerateConfiguration : public Error { using Error::Error; };
class IllConditioned : public Error { using Error::Error; };
class AtInfinity : public Error { using Error::Error; };

// sampling / perturbation
class InvalidVolume : public Error { using Error::Error; };
class LayoutNotVisible : public Error { using Error::Error; };
class InvalidPerturbation : public Error { using Error::Error; };

// io
class IoError : public Error { using Error::Error; };

/// Configuration problems. Carries every violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "\n";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

// Syntax error in a config or report file; message carries line:column.
class ParseError : public ConfigError {
 public:
  ParseError(std::string message, std::size_t line, std::size_t column)
      : ConfigError({message}), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Semantic violations, each prefixed with its field path (e.g. rig.pixel_spacing).
class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace carmtol
