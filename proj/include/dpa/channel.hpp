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
#include <iosfwd>
#include <span>
#include <vector>

#include "dpa/rng.hpp"
#include "dpa/types.hpp"

namespace dpa {

/// Unit-norm ULA response: entry n is exp(j 2pi (d/lambda) n sin(angle)) / sqrt(N).
CVector array_response(int n_antennas, double spacing_over_wavelength, double angle);

/// Cluster-ray parameters of one TX subarray. Row i is cluster i, column l
/// is ray l within the cluster. Angles are in radians, wrapped to [0, 2pi).
struct ClusterRayParams {
  CMatrix gains;
  RMatrix departure;  // AoD, seen by the TX subarray
  RMatrix arrival;    // AoA, seen by the RX array

  int clusters() const { return static_cast<int>(gains.rows()); }
  int rays() const { return static_cast<int>(gains.cols()); }
};

/// Draws one subarray's cluster-ray parameters. Cluster mean angles are
/// uniform on [0, 2pi) and ray offsets Laplacian with scale `angular_spread`.
ClusterRayParams sample_cluster_params(Rng& rng, int n_clusters, int n_rays,
                                       double angular_spread);

struct ChannelGeometry {
  int subarrays = 1;              // M_t
  int antennas_per_subarray = 1;  // N_t^sub
  int rx_antennas = 1;            // N_r
  double spacing_over_wavelength = 0.5;

  int total_tx() const { return subarrays * antennas_per_subarray; }
};

/// Frequency response of one subarray at subcarrier k (0-based) out of K:
///   gamma * sum_i sum_l alpha_il a_r(arrival_il) a_t(departure_il)^H e^{-j 2pi i k / K}
/// with gamma = sqrt(N_t^sub N_r / (N_cl N_ray)) and i the 1-based cluster index.
CMatrix subarray_channel(const ClusterRayParams& params, const ChannelGeometry& geometry,
                         int k, int n_subcarriers);

/// Per-subcarrier channels H[k] (N_r x N_t^tot). Immutable once built.
struct ChannelSet {
  std::vector<CMatrix> per_subcarrier;
  int subarrays = 0;
  int antennas_per_subarray = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  int subcarriers() const { return static_cast<int>(per_subcarrier.size()); }
  int rx_antennas() const {
    return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier.front().rows());
  }
  int total_tx() const { return subarrays * antennas_per_subarray; }
  const CMatrix& operator[](int k) const { return per_subcarrier[static_cast<std::size_t>(k)]; }
};

/// Horizontal concatenation H[k] = [H_1[k], ..., H_M[k]].
/// `blocks[m][k]` is subarray m at subcarrier k.
ChannelSet assemble_channel(std::span<const std::vector<CMatrix>> blocks, int n_subcarriers);

/// Estimated channel xi * H[k] + sqrt(1 - xi^2) * E[k], fresh CN(0, 1) error per subcarrier.
ChannelSet corrupt_csi(const ChannelSet& channels, double xi, Rng& rng);

struct ChannelModel {
  ChannelGeometry geometry;
  int subcarriers = 1;
  int clusters = 5;
  int rays = 10;
  double angular_spread = 0.0;  // radians
};

/// Full channel of one trial; subarray m draws from substream (seed, trial, kChannel, m).
ChannelSet generate_channel(const ChannelModel& model, std::uint64_t seed, std::uint64_t trial,
                            std::uint64_t config_hash = 0);

/// Text dump: header with seed, config hash and dimensions, then one block
/// per (m, k) listing the N_r x N_t^sub matrix row by row as "re,im" pairs.
void write_channel_dump(std::ostream& out, const ChannelSet& channels);

}  // namespace dpa
