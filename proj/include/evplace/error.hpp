// Copyright 2026 The evplace Authors.
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

#ifndef EVPLACE_ERROR_HPP_
#define EVPLACE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evplace {

// Base class for every error raised by the library. Callers that only care
// about "did the pipeline fail" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instance files. `line()` is 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& cause)
      : Error(line == 0 ? cause
                        : "line " + std::to_string(line) + ": " + cause),
        line_(line),
        cause_(cause) {}

  std::size_t line() const { return line_; }
  const std::string& cause() const { return cause_; }

 private:
  std::size_t line_;
  std::string cause_;
};

// Bad arguments to an operation (precondition violations).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The placement problem (or a restriction of it) has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Not enough history to fit or tune the forecaster.
class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

}  // namespace evplace

#endif  // EVPLACE_ERROR_HPP_
