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

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpa/channel.hpp"
#include "dpa/config.hpp"

namespace dpa {

/// Average mutual information in bits/s/Hz with an optimal fully-digital receiver:
///   (1/K) sum_k log2 det(I + P / (N_s sigma_z^2) H[k] F[k] F[k]^H H[k]^H).
/// Each ||F[k]||_F^2 must equal P within 1e-6 (ContractError otherwise).
double spectral_efficiency(const ChannelSet& channels, std::span<const CMatrix> precoders,
                           double power, int streams, double noise_variance);

/// Same, with F[k] = F_RF F_BB[k].
double spectral_efficiency(const ChannelSet& channels, const CMatrix& rf,
                           std::span<const CMatrix> basebands, double power, int streams,
                           double noise_variance);

enum class Scenario { kSnrSweep, kBitsSweep, kCsiSweep };

Scenario parse_scenario(std::string_view name);
std::string_view scenario_name(Scenario s);

struct ExperimentRecord {
  std::string method;  // "hybrid" or "fully_digital", suffixed "/<N_t_sub>x<N_r>" in csi_sweep
  double snr_db = 0.0;
  int trial = 0;
  std::optional<PhaseResolution> bits;  // unset for the fully-digital baseline
  double xi = 1.0;
  AntennaPair geometry;
  double spectral_efficiency = 0.0;
  double objective = 0.0;
  int outer_iterations = 0;
  double inner_iterations_mean = 0.0;
};

struct SummaryRow {
  std::string curve;  // method plus any bits / xi qualifier
  double snr_db = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  int count = 0;
};

struct ExperimentResult {
  Scenario scenario = Scenario::kSnrSweep;
  std::vector<ExperimentRecord> records;

  /// Per (curve, SNR) mean and standard error, in first-appearance order of curves.
  std::vector<SummaryRow> summarize() const;
};

/// For every grid point and trial: draw the channel, optionally corrupt it,
/// design on the estimate, evaluate on the true channel. The fully-digital
/// baseline is the optimum for the true channel. Trials run in parallel over
/// independent substreams; the record order is fixed (grid point, trial,
/// method), so the output never depends on thread count.
///
/// snr_sweep: one hybrid variant at bits[0], xi[0]
/// bits_sweep: one hybrid variant per entry of bits, at xi[0]
/// csi_sweep: one hybrid variant per (geometry, xi) at bits[0]
ExperimentResult run_experiment(const SystemConfig& config, Scenario scenario);

/// Header: method,snr_db,trial,bits,xi,se_bits_per_hz,objective,outer_iters,inner_iters_mean
void write_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct ComplexityRow {
  int subarrays = 0;
  int streams = 0;
  double seconds_per_iteration = 0.0;  // mean over repetitions
  double coefficient_of_variation = 0.0;
};

struct ComplexityProbeOptions {
  std::vector<std::pair<int, int>> grid;  // (M_t, N_s)
  int antennas_per_subarray = 64;
  int iterations = 200;  // ADMM iterations per timed solve
  int repetitions = 5;
  std::uint64_t seed = 1;
  // Time the update as written (A^T b formed every iteration) rather than
  // the default solver, which forms it once per solve.
  bool recompute_linear_term = true;
};

/// Wall time per ADMM iteration on random instances. Tolerances are zero so
/// each timed solve runs exactly `iterations` iterations; building the lifted
/// system is not timed.
std::vector<ComplexityRow> complexity_probe(const ComplexityProbeOptions& options);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace dpa
