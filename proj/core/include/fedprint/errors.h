// Copyright 2026 The fedprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDPRINT_ERRORS_H_
#define FEDPRINT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fedprint {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (bad shape, bad index, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// An experiment configuration is invalid. The message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A file is missing, unreadable or malformed. The message names the path.
class InputError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// An input that is mathematically degenerate for the requested operation,
// e.g. normalizing the zero vector. Callers pick their own fallback.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Federated training produced a non-finite loss.
class DivergedError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedprint

#endif  // FEDPRINT_ERRORS_H_
