// Copyright 2026 The gtpar Authors. All Rights Reserved.
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

namespace gtpar {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid scalar arguments (counts, ranks, rates).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Combination of settings that cannot run, e.g. heads not divisible by workers.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Workers disagreed inside a collective, or the group was aborted.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A cached forward state does not match the requested backward.
class StateError : public Error {
 public:
  using Error::Error;
};

// Cost profile lacks a coefficient or is inconsistent with the query.
class ProfileError : public Error {
 public:
  using Error::Error;
};

// Malformed measurements or input records.
class DataError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A result contains NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gtpar
