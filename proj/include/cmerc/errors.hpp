/*
 * Copyright 2026 The cmerc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <stdexcept>
#include <string>

namespace cmerc {

// Root of every error the library throws. The CLI maps the subclasses onto
// process exit codes (usage 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a diverging computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (feature files, checkpoints, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

// Lookup of an identifier that does not exist (speaker, utterance, ...).
class LookupError : public DataError {
 public:
  using DataError::DataError;
};

// Filesystem failures; the message always carries the offending path.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmerc
