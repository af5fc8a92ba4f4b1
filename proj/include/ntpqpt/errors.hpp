// Copyright 2026 The ntpqpt Authors
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

namespace ntpqpt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed shapes, non-square or non-Hermitian input, incompatible bases.
class RepresentationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public RepresentationError {
 public:
  using RepresentationError::RepresentationError;
};

/// A matrix expected to be positive semidefinite has an eigenvalue below the
/// clamp threshold.
class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Rank-deficient linear system (state basis, input set, beta tensor).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Count data that cannot be used (shape mismatch, negative counts, dark input).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Optimizer or constraint continuation did not reach its target.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace ntpqpt
