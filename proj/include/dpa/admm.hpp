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

#include <functional>
#include <optional>

#include "dpa/rf.hpp"
#include "dpa/types.hpp"

namespace dpa {

// Baseband subproblem for one subcarrier:
//
//   minimize ||F_opt - F_RF F_BB||_F^2  subject to  ||F_BB||_F^2 = P.
//
// With A = I_{N_s} (x) F_RF, x = vec(F_BB) and b = vec(F_opt) this is
// min ||A x - b||^2 on the sphere ||x||^2 = c. The solver works on the real
// lift xbar = [Re x; Im x], where
//
//   g(xbar) = ||A1 xbar - Re b||^2 + ||A2 xbar - Im b||^2,
//   A1 = [Re A, -Im A],  A2 = [Im A, Re A].
//
// Because F_RF^H F_RF = I, A1^T A1 + A2^T A2 = I and the smooth ADMM step
// has a closed form.

/// Real lift of the sphere-constrained least-squares problem.
struct RealLiftedSystem {
  RMatrix lift_re;  // A1
  RMatrix lift_im;  // A2
  RVector b_re;
  RVector b_im;
  double radius_sq = 0.0;  // c
  int baseband_rows = 0;   // M_t
  int baseband_cols = 0;   // N_s

  Eigen::Index dimension() const { return lift_re.cols(); }
};

/// Column-major vec followed by the real lift [Re; Im].
RVector vectorize(const CMatrix& baseband);
CMatrix devectorize(const RVector& xbar, int rows, int cols);

/// Lifts a generic complex system min ||A x - b||, ||x||^2 = c, where x is the
/// vec of a rows x cols matrix.
RealLiftedSystem lift_system(const CMatrix& a, const CVector& b, double radius_sq, int rows,
                             int cols);

/// Builds the system for F_RF (validated as block-diagonal, constant modulus) and F_opt[k].
RealLiftedSystem build_real_system(const CMatrix& rf, const CMatrix& target, double power);
RealLiftedSystem build_real_system(const RfPhases& phases, const CMatrix& target, double power);

/// g(xbar), evaluated directly from the lifted matrices.
double lifted_objective(const RealLiftedSystem& system, const RVector& xbar);

/// Max-abs deviation of A1^T A1 + A2^T A2 from the identity.
double gram_deviation(const RealLiftedSystem& system);

enum class XUpdateRule {
  kScaledDual,  // rho (y_i - nu_i): the exact minimizer of the augmented Lagrangian
  kVerbatim,    // rho (y_i - xbar_i): the printed variant, kept for comparison
};

struct AdmmState {
  RVector x;   // xbar
  RVector y;   // feasible iterate, ||y||^2 = c
  RVector nu;  // scaled dual
  int iteration = 0;
  double primal_residual = 0.0;  // ||xbar - y||
  double dual_residual = 0.0;    // ||rho (y_{i+1} - y_i)||
};

struct AdmmOptions {
  double rho = 1.0;
  double eps_primal = 1e-6;
  double eps_dual = 1e-6;
  int max_iters = 10000;
  XUpdateRule rule = XUpdateRule::kScaledDual;
  // Recompute 2 A1^T Re b + 2 A2^T Im b every iteration, as the update is
  // written, instead of once per solve. Same iterates; used for cost studies.
  bool recompute_linear_term = false;
  std::function<void(const AdmmState&)> on_iteration;
};

struct AdmmReport {
  CMatrix solution;  // M_t x N_s, ||.||_F^2 = P
  AdmmState final_state;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
};

/// Default start: y = sqrt(c) v / ||v|| with v = A^H b (or e_1 when v = 0), nu = 0.
AdmmState initial_state(const RealLiftedSystem& system);

/// Scaled ADMM on the lifted problem:
///   xbar <- (2 A1^T Re b + 2 A2^T Im b + rho (y - nu)) / (2 + rho)
///   y    <- sqrt(c) (xbar + nu) / ||xbar + nu||
///   nu   <- nu + xbar - y
/// until both residuals drop below their tolerances. Returns y, which is
/// always feasible; on hitting max_iters the best feasible iterate is returned
/// and `converged` is false. Throws DegenerateProjection if xbar + nu = 0.
AdmmReport admm_solve(const RealLiftedSystem& system, const AdmmOptions& options,
                      std::optional<AdmmState> start = std::nullopt);

/// Whether the scaled-dual iteration has a fixed point. At x = y the updates
/// need (1 - 2/rho) y + (2/rho) q to point along y = sqrt(c) q / ||q||, with
/// q = A^T b, which holds iff ||q|| > sqrt(c) (1 - rho / 2). Without one the
/// iteration cannot meet its stopping rule.
bool has_fixed_point(const RealLiftedSystem& system, double rho);

struct OracleSolution {
  CMatrix solution;
  double objective = 0.0;
  bool degenerate = false;  // A^H b = 0: every feasible point is optimal
};

/// Global optimum sqrt(c) A^H b / ||A^H b||. Exact because A^H A = I turns the
/// objective into ||x||^2 - 2 Re<A^H b, x> + ||b||^2. Throws ContractError if
/// the Gram identity fails by more than 1e-8.
OracleSolution sphere_ls_oracle(const RealLiftedSystem& system);

}  // namespace dpa
