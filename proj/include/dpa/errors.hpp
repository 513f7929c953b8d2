// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace dpa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Index outside of its valid range (subcarrier, subarray, ...).
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Scalar argument outside of its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Every singular value of a channel is zero; no power can be allocated.
class DegenerateChannel : public Error {
 public:
  DegenerateChannel() : Error("degenerate channel: all singular values are zero") {}
};

/// RF precoder does not have the block-diagonal, constant-modulus layout.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// The sphere projection hit a zero vector. Recoverable: perturb the dual
/// variable and restart the solve.
class DegenerateProjection : public Error {
 public:
  explicit DegenerateProjection(int iteration)
      : Error("degenerate sphere projection at ADMM iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// A caller broke a documented precondition (e.g. precoder power budget).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpa
