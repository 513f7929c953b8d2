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

#include "dpa/altmin.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dpa/errors.hpp"

namespace dpa {

double objective(std::span<const CMatrix> targets, const CMatrix& rf,
                 std::span<const CMatrix> basebands) {
  if (targets.size() != basebands.size()) {
    throw DimensionError("objective: need one baseband per target");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    total += (targets[k] - rf * basebands[k]).squaredNorm();
  }
  return total;
}

namespace {

struct BasebandRound {
  int iterations = 0;
  int nonconverged = 0;
  int skipped = 0;
};

AdmmReport solve_with_retry(const RealLiftedSystem& system, const AdmmOptions& admm,
                            std::optional<AdmmState> start) {
  for (int attempt = 0;; ++attempt) {
    try {
      return admm_solve(system, admm, start);
    } catch (const DegenerateProjection&) {
      if (attempt >= 3) throw;
      AdmmState nudged = start ? *start : initial_state(system);
      nudged.nu(0) += 1e-12;
      start = std::move(nudged);
    }
  }
}

// One Algorithm-1 baseband step: every subcarrier solved against the same F_RF.
// Warm starts come only from converged solves. A warm start that fails to
// converge is retried from the default start, whose best iterate is never
// worse than the default point itself.
BasebandRound solve_basebands(const PrecoderTarget& target, const RfPhases& phases,
                              const AltMinOptions& options,
                              std::vector<std::optional<AdmmState>>& warm,
                              std::vector<CMatrix>& basebands) {
  const AdmmOptions& admm = options.admm;
  AdmmOptions no_iterations = admm;
  no_iterations.max_iters = 0;
  const CMatrix rf = assemble_rf(phases);
  BasebandRound round;
  for (int k = 0; k < target.size(); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const RealLiftedSystem system = build_real_system(rf, target.precoder(k), target.power);
    if (options.skip_without_fixed_point && admm.rule == XUpdateRule::kScaledDual &&
        !has_fixed_point(system, admm.rho)) {
      ++round.skipped;
      ++round.nonconverged;
      basebands[idx] = admm_solve(system, no_iterations).solution;
      warm[idx].reset();
      continue;
    }
    AdmmReport report = solve_with_retry(system, admm, warm[idx]);
    if (!report.converged && warm[idx]) {
      round.iterations += report.iterations;
      report = solve_with_retry(system, admm, std::nullopt);
    }
    round.iterations += report.iterations;
    if (!report.converged) ++round.nonconverged;
    basebands[idx] = std::move(report.solution);
    if (report.converged) {
      warm[idx] = std::move(report.final_state);
    } else {
      warm[idx].reset();
    }
  }
  return round;
}

}  // namespace

HybridPrecoder hybrid_precode(const PrecoderTarget& target, int subarrays,
                              const AltMinOptions& options) {
  if (target.size() < 1) throw DimensionError("hybrid_precode: no subcarriers");
  if (!(options.outer_tol > 0.0) || options.outer_max_iters < 1) {
    throw DomainError("hybrid_precode: outer tolerance and iteration limit must be positive");
  }
  const Eigen::Index n_total = target.precoder(0).rows();
  if (subarrays < 1 || n_total % subarrays != 0) {
    throw DimensionError(fmt::format("hybrid_precode: {} antennas do not split into {} subarrays",
                                     n_total, subarrays));
  }
  if (target.streams > subarrays) {
    throw DimensionError("hybrid_precode: streams exceed RF chains");
  }
  const int per = static_cast<int>(n_total / subarrays);

  const bool quantize_in_loop = options.placement == QuantizePlacement::kEveryIteration;
  const PhaseResolution loop_resolution =
      quantize_in_loop ? options.resolution : PhaseResolution::infinite();

  HybridPrecoder out;
  out.phases = options.initial_phases ? *options.initial_phases : RfPhases::zeros(subarrays, per);
  if (out.phases.subarrays() != subarrays || out.phases.antennas_per_subarray() != per) {
    throw DimensionError("hybrid_precode: initial phases do not match the array");
  }
  out.phases = quantize(out.phases, loop_resolution);

  const std::vector<CMatrix> targets = target.precoders();
  std::vector<std::optional<AdmmState>> warm(targets.size());
  out.basebands.resize(targets.size());
  long long inner_total = 0;
  int solves = 0;

  auto run_round = [&]() {
    const BasebandRound round =
        solve_basebands(target, out.phases, options, warm, out.basebands);
    inner_total += round.iterations;
    out.nonconverged_inner_solves += round.nonconverged;
    out.skipped_inner_solves += round.skipped;
    solves += target.size();
    ++out.outer_iterations;
    const double value = objective(targets, assemble_rf(out.phases), out.basebands);
    out.objective_trace.push_back(value);
    return value;
  };

  double previous = std::numeric_limits<double>::infinity();
  for (int n = 0; n < options.outer_max_iters; ++n) {
    const double value = run_round();
    if (std::isfinite(previous)) {
      const double decrease = previous > 0.0 ? (previous - value) / previous : 0.0;
      if (decrease < options.outer_tol) {
        out.converged = true;
        break;
      }
    }
    if (value == 0.0) {
      out.converged = true;
      break;
    }
    previous = value;
    if (n + 1 == options.outer_max_iters) break;

    PhaseUpdate update = optimal_phases(targets, out.basebands, subarrays);
    out.degenerate_phase_elements += update.degenerate_elements;
    out.phases = quantize(update.phases, loop_resolution);
  }

  if (!quantize_in_loop && !options.resolution.is_infinite()) {
    out.phases = quantize(out.phases, options.resolution);
    run_round();
  }

  out.rf = assemble_rf(out.phases);
  out.mean_inner_iterations = solves > 0 ? static_cast<double>(inner_total) / solves : 0.0;
  return out;
}

}  // namespace dpa
