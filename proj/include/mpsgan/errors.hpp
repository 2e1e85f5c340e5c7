// Copyright 2026 The mpsgan Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace mpsgan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad dimensions, out-of-range indices, invalid configuration values.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input value outside an embedding's support.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A contraction or density collapsed to zero.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Embedding cannot be used for exact generation.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed model file or CSV.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// NaN / Inf encountered during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpsgan
