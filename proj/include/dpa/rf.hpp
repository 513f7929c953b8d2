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

#include <optional>
#include <span>
#include <vector>

#include "dpa/types.hpp"

namespace dpa {

/// Phase-shifter resolution: B bits (2^B uniformly spaced phases) or continuous.
class PhaseResolution {
 public:
  static PhaseResolution infinite() { return PhaseResolution(); }
  static PhaseResolution from_bits(int bits);

  bool is_infinite() const { return !bits_.has_value(); }
  int bits() const { return bits_.value(); }
  /// Grid spacing 2pi / 2^B; zero when continuous.
  double step() const;

  friend bool operator==(const PhaseResolution&, const PhaseResolution&) = default;

 private:
  PhaseResolution() = default;
  std::optional<int> bits_;
};

/// Phases of the block-diagonal RF precoder: one vector of N_t^sub phases
/// per subarray, all in [0, 2pi).
struct RfPhases {
  std::vector<RVector> per_subarray;
  PhaseResolution resolution = PhaseResolution::infinite();

  static RfPhases zeros(int subarrays, int antennas_per_subarray);

  int subarrays() const { return static_cast<int>(per_subarray.size()); }
  int antennas_per_subarray() const {
    return per_subarray.empty() ? 0 : static_cast<int>(per_subarray.front().size());
  }
  int total_antennas() const { return subarrays() * antennas_per_subarray(); }
};

struct PhaseUpdate {
  RfPhases phases;
  // Elements whose accumulated correlation was exactly zero; their phase is set to 0.
  int degenerate_elements = 0;
};

/// Closed-form per-element minimizer of sum_k ||F_opt[k] - F_RF F_BB[k]||_F^2 over
/// the phases of F_RF with the basebands fixed:
///   phase(i) = angle( sum_k [F_opt[k]]_{i,:} [F_BB[k]]_{l,:}^H ),  l = subarray of i.
PhaseUpdate optimal_phases(std::span<const CMatrix> targets, std::span<const CMatrix> basebands,
                           int subarrays);

/// Nearest grid phase under circular distance; ties go to the smaller grid index.
double quantize_phase(double phase, PhaseResolution resolution);
RfPhases quantize(const RfPhases& phases, PhaseResolution resolution);

/// Materializes F_RF (N_t^tot x M_t): entry (i, l) = e^{j phase_i} / sqrt(N_t^sub)
/// when antenna i belongs to subarray l, zero otherwise.
CMatrix assemble_rf(const RfPhases& phases);

/// Inverse of assemble_rf. Throws StructureError unless `rf` is block-diagonal
/// with `subarrays` equal blocks of entries of modulus 1/sqrt(N_t^sub).
RfPhases phases_from_rf(const CMatrix& rf, int subarrays, double tolerance = 1e-9);

}  // namespace dpa
