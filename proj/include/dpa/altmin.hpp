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

#include "dpa/admm.hpp"
#include "dpa/rf.hpp"
#include "dpa/target.hpp"

namespace dpa {

enum class QuantizePlacement {
  kEveryIteration,    // quantize at each RF update
  kAfterConvergence,  // iterate with continuous phases, quantize once at the end
};

struct AltMinOptions {
  AdmmOptions admm;
  PhaseResolution resolution = PhaseResolution::infinite();
  QuantizePlacement placement = QuantizePlacement::kEveryIteration;
  double outer_tol = 1e-4;  // relative objective decrease
  int outer_max_iters = 50;
  // When a subproblem's ADMM iteration has no fixed point (see has_fixed_point),
  // return the default start, which is then also its best feasible iterate,
  // instead of running out the iteration budget.
  bool skip_without_fixed_point = true;
  // Starting phases; all zeros (F_RF entries 1/sqrt(N_t^sub)) when unset.
  std::optional<RfPhases> initial_phases;
};

struct HybridPrecoder {
  RfPhases phases;
  CMatrix rf;
  std::vector<CMatrix> basebands;
  // Objective after each baseband update, i.e. for the pair (F_RF^(n), F_BB^(n)).
  std::vector<double> objective_trace;
  bool converged = false;
  int outer_iterations = 0;
  double mean_inner_iterations = 0.0;
  int nonconverged_inner_solves = 0;  // includes skipped solves
  int skipped_inner_solves = 0;
  int degenerate_phase_elements = 0;

  double final_objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// sum_k ||F_opt[k] - F_RF F_BB[k]||_F^2
double objective(std::span<const CMatrix> targets, const CMatrix& rf,
                 std::span<const CMatrix> basebands);

/// Alternates per-subcarrier ADMM baseband solves with the closed-form RF
/// phase update until the relative objective decrease falls below
/// `outer_tol` or `outer_max_iters` baseband rounds have run. The returned
/// basebands are the solves against the returned F_RF.
HybridPrecoder hybrid_precode(const PrecoderTarget& target, int subarrays,
                              const AltMinOptions& options);

}  // namespace dpa
