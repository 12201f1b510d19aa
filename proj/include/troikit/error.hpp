/* Copyright 2026 The troikit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef TROIKIT_ERROR_HPP_
#define TROIKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace troikit {

// Base of every error thrown by the library. The C API maps each subclass
// onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Hyperparameters or run configuration are inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A region of interest has zero area after clipping or an out-of-range frame.
class InvalidBoxError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (non-scalar loss, double
// backward, missing gradients, mismatched footprints).
class ContractError : public Error {
 public:
  using Error::Error;
};

// File system or on-disk format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or a failed numerical check.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace troikit

#endif  // TROIKIT_ERROR_HPP_
