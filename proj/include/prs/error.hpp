// Copyright 2026 The PRSNet-Desk Authors. All Rights Reserved.
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

namespace prs {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// stable exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class AutogradError : public Error {
 public:
  using Error::Error;
};

/// Raised when an operation produces NaN/Inf from finite inputs.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized content (bad magic, truncated payload, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint content disagrees with the model it is loaded into, or a
/// checkpoint tensor file is malformed.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

class BadIdError : public Error {
 public:
  using Error::Error;
};

}  // namespace prs
