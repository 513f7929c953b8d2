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

#include "dpa/admm.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dpa/errors.hpp"

namespace dpa {

namespace {

// Below this, A^H b is treated as zero and the problem has no preferred direction.
bool negligible(double v_norm, double b_norm) {
  return v_norm <= 1e-12 * std::max(1.0, b_norm);
}

RVector correlation(const RealLiftedSystem& s) {
  return s.lift_re.transpose() * s.b_re + s.lift_im.transpose() * s.b_im;
}

double rhs_norm(const RealLiftedSystem& s) {
  return std::sqrt(s.b_re.squaredNorm() + s.b_im.squaredNorm());
}

}  // namespace

RVector vectorize(const CMatrix& baseband) {
  const Eigen::Index n = baseband.size();
  RVector xbar(2 * n);
  // Eigen storage is column-major, so linear index == vec index
  for (Eigen::Index i = 0; i < n; ++i) {
    xbar(i) = baseband(i).real();
    xbar(n + i) = baseband(i).imag();
  }
  return xbar;
}

CMatrix devectorize(const RVector& xbar, int rows, int cols) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows) * cols;
  if (xbar.size() != 2 * n) {
    throw DimensionError(fmt::format("devectorize: vector of length {} cannot hold a {}x{} matrix",
                                     xbar.size(), rows, cols));
  }
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < n; ++i) m(i) = Complex{xbar(i), xbar(n + i)};
  return m;
}

RealLiftedSystem lift_system(const CMatrix& a, const CVector& b, double radius_sq, int rows,
                             int cols) {
  if (a.cols() != static_cast<Eigen::Index>(rows) * cols || a.rows() != b.size()) {
    throw DimensionError(fmt::format("lift_system: A is {}x{}, b has {} entries, x is {}x{}",
                                     a.rows(), a.cols(), b.size(), rows, cols));
  }
  if (!(radius_sq > 0.0)) throw DomainError("lift_system: sphere radius must be positive");
  const Eigen::Index n = a.cols();
  RealLiftedSystem s;
  s.lift_re.resize(a.rows(), 2 * n);
  s.lift_im.resize(a.rows(), 2 * n);
  s.lift_re.leftCols(n) = a.real();
  s.lift_re.rightCols(n) = -a.imag();
  s.lift_im.leftCols(n) = a.imag();
  s.lift_im.rightCols(n) = a.real();
  s.b_re = b.real();
  s.b_im = b.imag();
  s.radius_sq = radius_sq;
  s.baseband_rows = rows;
  s.baseband_cols = cols;
  return s;
}

RealLiftedSystem build_real_system(const CMatrix& rf, const CMatrix& target, double power) {
  const int subarrays = static_cast<int>(rf.cols());
  phases_from_rf(rf, subarrays);  // structure check only
  if (target.rows() != rf.rows()) {
    throw DimensionError(fmt::format("build_real_system: F_RF has {} rows, F_opt has {}",
                                     rf.rows(), target.rows()));
  }
  const Eigen::Index streams = target.cols();
  const Eigen::Index n_total = rf.rows();
  // A = I_{N_s} kron F_RF
  CMatrix a = CMatrix::Zero(streams * n_total, streams * subarrays);
  for (Eigen::Index s = 0; s < streams; ++s) {
    a.block(s * n_total, s * subarrays, n_total, subarrays) = rf;
  }
  const CVector b = target.reshaped();
  return lift_system(a, b, power, subarrays, static_cast<int>(streams));
}

RealLiftedSystem build_real_system(const RfPhases& phases, const CMatrix& target, double power) {
  return build_real_system(assemble_rf(phases), target, power);
}

double lifted_objective(const RealLiftedSystem& s, const RVector& xbar) {
  return (s.lift_re * xbar - s.b_re).squaredNorm() + (s.lift_im * xbar - s.b_im).squaredNorm();
}

double gram_deviation(const RealLiftedSystem& s) {
  const RMatrix gram = s.lift_re.transpose() * s.lift_re + s.lift_im.transpose() * s.lift_im;
  return (gram - RMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

bool has_fixed_point(const RealLiftedSystem& s, double rho) {
  if (!(rho > 0.0)) throw DomainError("has_fixed_point: rho must be positive");
  return correlation(s).norm() > std::sqrt(s.radius_sq) * (1.0 - 0.5 * rho);
}

AdmmState initial_state(const RealLiftedSystem& s) {
  const RVector v = correlation(s);
  const double radius = std::sqrt(s.radius_sq);
  AdmmState st;
  const double v_norm = v.norm();
  if (negligible(v_norm, rhs_norm(s))) {
    st.y = RVector::Zero(v.size());
    st.y(0) = radius;
  } else {
    st.y = (radius / v_norm) * v;
  }
  st.x = st.y;
  st.nu = RVector::Zero(v.size());
  return st;
}

AdmmReport admm_solve(const RealLiftedSystem& s, const AdmmOptions& options,
                      std::optional<AdmmState> start) {
  if (!(options.rho > 0.0)) throw DomainError("admm_solve: rho must be positive");
  if (!(s.radius_sq > 0.0)) throw DomainError("admm_solve: sphere radius must be positive");
  if (options.max_iters < 0) throw DomainError("admm_solve: negative iteration limit");

  AdmmState st = start ? std::move(*start) : initial_state(s);
  const Eigen::Index n = s.dimension();
  if (st.y.size() != n || st.nu.size() != n) {
    throw DimensionError("admm_solve: warm start does not match the system dimension");
  }
  if (st.x.size() != n) st.x = st.y;
  st.iteration = 0;

  const double rho = options.rho;
  const double radius = std::sqrt(s.radius_sq);
  // loop-invariant part of the xbar numerator
  const RVector q = correlation(s);
  RVector linear = 2.0 * q;
  // with the Gram identity, g(y) = ||y||^2 - 2 q^T y + ||b||^2
  const double b_sq = s.b_re.squaredNorm() + s.b_im.squaredNorm();
  auto tracked_objective = [&](const RVector& y) { return y.squaredNorm() - 2.0 * q.dot(y) + b_sq; };

  RVector best = st.y;
  double best_objective = tracked_objective(st.y);
  bool converged = false;
  const bool scaled_dual = options.rule == XUpdateRule::kScaledDual;
  const double inv_denominator = 1.0 / (2.0 + rho);
  RVector sum(n);
  for (int it = 1; it <= options.max_iters; ++it) {
    if (options.recompute_linear_term) linear = 2.0 * correlation(s);

    // xbar-update, fused with the projection argument xbar + nu
    double sum_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double anchor = scaled_dual ? st.nu(i) : st.x(i);
      st.x(i) = (linear(i) + rho * (st.y(i) - anchor)) * inv_denominator;
      sum(i) = st.x(i) + st.nu(i);
      sum_sq += sum(i) * sum(i);
    }
    if (sum_sq == 0.0) throw DegenerateProjection(it);
    const double scale = radius / std::sqrt(sum_sq);

    // y- and nu-updates with residuals and the objective at the new y
    double primal_sq = 0.0, dual_sq = 0.0, y_sq = 0.0, qy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y_new = scale * sum(i);
      const double gap = st.x(i) - y_new;
      st.nu(i) += gap;
      primal_sq += gap * gap;
      const double step = y_new - st.y(i);
      dual_sq += step * step;
      st.y(i) = y_new;
      y_sq += y_new * y_new;
      qy += q(i) * y_new;
    }
    st.primal_residual = std::sqrt(primal_sq);
    st.dual_residual = rho * std::sqrt(dual_sq);
    st.iteration = it;

    const double objective = y_sq - 2.0 * qy + b_sq;
    if (objective < best_objective) {
      best_objective = objective;
      best = st.y;
    }
    if (options.on_iteration) options.on_iteration(st);
    if (st.primal_residual < options.eps_primal && st.dual_residual < options.eps_dual) {
      converged = true;
      break;
    }
  }

  AdmmReport report;
  const RVector& chosen = converged ? st.y : best;
  report.solution = devectorize(chosen, s.baseband_rows, s.baseband_cols);
  report.objective = lifted_objective(s, chosen);
  report.iterations = st.iteration;
  report.primal_residual = st.primal_residual;
  report.dual_residual = st.dual_residual;
  report.converged = converged;
  report.final_state = std::move(st);
  return report;
}

OracleSolution sphere_ls_oracle(const RealLiftedSystem& s) {
  const double deviation = gram_deviation(s);
  if (deviation > 1e-8) {
    throw ContractError(fmt::format("sphere_ls_oracle: Gram identity off by {:.3g}", deviation));
  }
  const RVector v = correlation(s);
  const double radius = std::sqrt(s.radius_sq);
  OracleSolution out;
  RVector x;
  const double v_norm = v.norm();
  if (negligible(v_norm, rhs_norm(s))) {
    x = RVector::Zero(v.size());
    x(0) = radius;
    out.degenerate = true;
  } else {
    x = (radius / v_norm) * v;
  }
  out.objective = lifted_objective(s, x);
  out.solution = devectorize(x, s.baseband_rows, s.baseband_cols);
  return out;
}

}  // namespace dpa
