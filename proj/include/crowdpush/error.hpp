// Copyright 2026 The crowdpush Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crowdpush {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind { validation, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : ValidationError("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateRecordError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateGeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Two sites closer than the coincidence tolerance.
class CoincidentSiteError : public DegenerateGeometryError {
 public:
  CoincidentSiteError(std::string first, std::string second)
      : DegenerateGeometryError("coincident sites " + first + " and " + second),
        first_(std::move(first)),
        second_(std::move(second)) {}
  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }

 private:
  std::string first_;
  std::string second_;
};

class DegenerateRegionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OutOfFrameError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Score file does not cover every manifest sample.
class CoverageError : public ValidationError {
 public:
  explicit CoverageError(std::vector<std::string> missing)
      : ValidationError(describe(missing)), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& missing) {
    std::string msg = "score file is missing " + std::to_string(missing.size()) + " sample(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    return msg;
  }
  std::vector<std::string> missing_;
};

class DegenerateTrainingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A rate whose denominator class is empty.
class UndefinedRateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace crowdpush
