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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpa/admm.hpp"
#include "dpa/altmin.hpp"
#include "dpa/channel.hpp"
#include "dpa/rf.hpp"
#include "dpa/target.hpp"

namespace dpa {

/// Antenna counts for one csi_sweep geometry.
struct AntennaPair {
  int antennas_per_subarray = 0;  // N_t^sub
  int rx_antennas = 0;            // N_r
  friend bool operator==(const AntennaPair&, const AntennaPair&) = default;
};

/// Every parameter of a run. Keys in the config file carry the same names as
/// the comments below.
struct SystemConfig {
  int subarrays = 0;              // M_t
  int antennas_per_subarray = 0;  // N_t_sub
  int rx_antennas = 0;            // N_r
  int streams = 0;                // N_s
  int subcarriers = 0;            // K
  int clusters = 5;               // N_cl
  int rays = 10;                  // N_ray
  double angular_spread_deg = 10.0;
  double spacing_over_wavelength = 0.5;  // d_e_over_lambda
  double power = 0.0;                    // P, defaults to N_s
  std::vector<double> snr_grid_db{-10.0, -5.0, 0.0, 5.0, 10.0};
  int trials = 100;
  std::vector<PhaseResolution> bits{PhaseResolution::infinite()};
  std::vector<double> xi{1.0};
  std::vector<AntennaPair> antenna_grid;  // empty: the single (N_t_sub, N_r) geometry
  double rho = 1.0;
  double eps_p = 1e-6;
  double eps_d = 1e-6;
  int admm_max_iters = 10000;
  double outer_tol = 1e-4;
  int outer_max_iters = 50;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  WaterFillingNoise water_filling_noise = WaterFillingNoise::kStreamScaled;
  XUpdateRule x_update = XUpdateRule::kScaledDual;
  QuantizePlacement quantize = QuantizePlacement::kEveryIteration;
  bool skip_no_fixed_point = true;
  int threads = 0;  // 0: one per hardware thread

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;

  int total_tx() const { return subarrays * antennas_per_subarray; }
  /// Geometries a csi_sweep iterates over.
  std::vector<AntennaPair> geometries() const;
  ChannelModel channel_model(AntennaPair geometry) const;
  AdmmOptions admm_options() const;
  AltMinOptions altmin_options(PhaseResolution resolution) const;
  TargetOptions target_options(double snr_db) const;
};

/// Parses `key = value` lines. '#' starts a comment. Lists are comma separated;
/// snr_grid_db also accepts start:step:stop. Unknown or duplicate keys and
/// invariant violations raise ConfigError naming the line or field.
SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::string& path);

/// Checks cross-field invariants; throws ConfigError naming the field.
void validate(const SystemConfig& config);

/// Full effective configuration; parse_config(to_text(c)) == c.
std::string to_text(const SystemConfig& config);

/// FNV-1a hash of to_text(config).
std::uint64_t config_hash(const SystemConfig& config);

std::string format_resolution(PhaseResolution r);

}  // namespace dpa
