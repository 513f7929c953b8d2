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

#include <cstdint>
#include <random>

#include "dpa/types.hpp"

namespace dpa {

/// Purpose tag mixed into a substream key so that independent consumers of
/// the same (seed, trial) never share random numbers.
enum class StreamTag : std::uint64_t {
  kChannel = 1,    // index = subarray
  kCsiError = 2,   // index = 0
  kSynthetic = 3,  // test/probe instances
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based substream key:
///   key = mix64(seed ^ mix64(trial ^ mix64(tag ^ mix64(index))))
/// Distinct (trial, tag, index) tuples give statistically independent
/// streams, and any stream can be regenerated without touching the others.
std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t trial, StreamTag tag,
                                std::uint64_t index);

/// Deterministic random stream. Every variate is derived from raw 64-bit
/// mt19937_64 output with explicit formulas, so results are bit-identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : engine_(key) {}
  Rng(std::uint64_t seed, std::uint64_t trial, StreamTag tag, std::uint64_t index)
      : engine_(derive_stream_key(seed, trial, tag, index)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Circularly-symmetric complex Gaussian with unit variance, CN(0, 1).
  Complex complex_normal();
  /// Zero-mean Laplacian with the given scale, via the inverse CDF.
  double laplacian(double scale);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dpa
