// aldr/error.h

// Copyright 2026  The ALDR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ALDR_ERROR_H_
#define ALDR_ERROR_H_

#include <stdexcept>
#include <string>

namespace aldr {

// Error classes map onto process exit codes in the CLI: config faults exit
// with 2, data faults with 3, numeric faults with 4, anything else with 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Bad flags, bad config keys/values, parameter bounds.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &msg) : Error(msg) {}
};

// Unreadable or malformed input files, failed validation of their contents.
class DataError : public Error {
 public:
  explicit DataError(const std::string &msg) : Error(msg) {}
};

// NaN/inf losses or gradients, degenerate inputs (zero-norm features).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string &msg) : Error(msg) {}
};

// Tensor dimension mismatches and other broken call contracts.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string &msg) : Error(msg) {}
};

}  // namespace aldr

#endif  // ALDR_ERROR_H_
