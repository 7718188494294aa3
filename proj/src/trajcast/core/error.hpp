/* Copyright 2026 The Trajcast Authors. All Rights Reserved.

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

#ifndef TRAJCAST_CORE_ERROR_HPP_
#define TRAJCAST_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace trajcast {

// Error taxonomy mirrors the process exit codes: usage -> 2, data -> 3,
// numeric -> 4. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flags, malformed configuration, inconsistent requests.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Missing or invalid input files and payloads.
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor shape mismatches. Usually a symptom of bad input data.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values or failed numeric contracts.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace trajcast

#endif  // TRAJCAST_CORE_ERROR_HPP_
