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

#include <vector>

#include "dpa/channel.hpp"
#include "dpa/types.hpp"

namespace dpa {

struct SvdBasis {
  CMatrix basis;           // right singular vectors, one column per stream
  RVector singular_values; // descending
};

/// Right singular vectors of the `n_streams` largest singular values of `h`.
SvdBasis svd_basis(const CMatrix& h, int n_streams);

/// Water-filling p_i = max(0, mu - noise_scale / sigma_i^2) with sum p_i = budget.
/// The water level is found by enumerating active-set breakpoints, so the
/// result is exact up to rounding. Zero singular values receive no power.
RVector water_filling(const RVector& singular_values, double budget, double noise_scale);

/// Which noise level the water-filling sees.
enum class WaterFillingNoise {
  kStreamScaled,  // sigma_z^2 * N_s / P, the per-stream SNR under E{ss^H} = (P/N_s) I
  kRaw,           // sigma_z^2
};

struct TargetOptions {
  int streams = 1;
  double power = 1.0;           // P
  double noise_variance = 1.0;  // sigma_z^2
  WaterFillingNoise noise = WaterFillingNoise::kStreamScaled;

  double noise_scale() const;
};

struct SubcarrierTarget {
  CMatrix precoder;  // F_opt[k] = V[k] diag(sqrt(p))
  RVector singular_values;
  RVector powers;
};

/// Fully-digital optimum per subcarrier.
struct PrecoderTarget {
  std::vector<SubcarrierTarget> subcarriers;
  double power = 0.0;
  int streams = 0;

  int size() const { return static_cast<int>(subcarriers.size()); }
  const CMatrix& precoder(int k) const {
    return subcarriers[static_cast<std::size_t>(k)].precoder;
  }
  std::vector<CMatrix> precoders() const;
};

SubcarrierTarget build_subcarrier_target(const CMatrix& h, const TargetOptions& options);
PrecoderTarget build_target(const ChannelSet& channels, const TargetOptions& options);

}  // namespace dpa
