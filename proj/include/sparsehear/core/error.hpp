// Copyright 2026 The sparsehear Authors. All Rights Reserved.
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

namespace sparsehear {

// Process exit codes used by the command-line tool.
enum class ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kData)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed or out-of-contract input data (empty signal, non-binary vector...).
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(what, ExitCode::kData) {}
};

// Inconsistent parameters (frequency ranges, geometry, counts).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, ExitCode::kUsage) {}
};

// Matrix or vector dimensions that do not agree.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(what, ExitCode::kData) {}
};

// Numerical breakdown (singular covariance, no usable components...).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, ExitCode::kNumeric) {}
};

// Unreadable or corrupt files.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what, ExitCode::kData) {}
};

}  // namespace sparsehear
