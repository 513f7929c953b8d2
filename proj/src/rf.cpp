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

#include "dpa/rf.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dpa/errors.hpp"

namespace dpa {

PhaseResolution PhaseResolution::from_bits(int bits) {
  if (bits < 1 || bits > 30) {
    throw DomainError(fmt::format("phase resolution must be 1..30 bits, got {}", bits));
  }
  PhaseResolution r;
  r.bits_ = bits;
  return r;
}

double PhaseResolution::step() const {
  return bits_ ? kTwoPi / static_cast<double>(1u << *bits_) : 0.0;
}

RfPhases RfPhases::zeros(int subarrays, int antennas_per_subarray) {
  RfPhases p;
  p.per_subarray.assign(static_cast<std::size_t>(subarrays),
                        RVector::Zero(antennas_per_subarray));
  return p;
}

PhaseUpdate optimal_phases(std::span<const CMatrix> targets, std::span<const CMatrix> basebands,
                           int subarrays) {
  if (targets.empty() || targets.size() != basebands.size()) {
    throw DimensionError("optimal_phases: need one baseband per target and at least one");
  }
  const Eigen::Index n_total = targets.front().rows();
  const Eigen::Index n_streams = targets.front().cols();
  if (subarrays < 1 || n_total % subarrays != 0) {
    throw DimensionError("optimal_phases: antenna count is not a multiple of the subarray count");
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k].rows() != n_total || targets[k].cols() != n_streams ||
        basebands[k].rows() != subarrays || basebands[k].cols() != n_streams) {
      throw DimensionError(fmt::format("optimal_phases: inconsistent shapes at subcarrier {}", k));
    }
  }
  const Eigen::Index per = n_total / subarrays;

  PhaseUpdate out{RfPhases::zeros(subarrays, static_cast<int>(per)), 0};
  for (Eigen::Index i = 0; i < n_total; ++i) {
    const Eigen::Index l = i / per;
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < targets.size(); ++k) {
      acc += basebands[k].row(l).dot(targets[k].row(i));
    }
    double phase = 0.0;
    if (acc == Complex{0.0, 0.0}) {
      ++out.degenerate_elements;
    } else {
      phase = wrap_phase(std::arg(acc));
    }
    out.phases.per_subarray[static_cast<std::size_t>(l)](i - l * per) = phase;
  }
  return out;
}

double quantize_phase(double phase, PhaseResolution resolution) {
  const double wrapped = wrap_phase(phase);
  if (resolution.is_infinite()) return wrapped;
  const auto levels = static_cast<long long>(1) << resolution.bits();
  const double t = wrapped / resolution.step();
  const double lower = std::floor(t);
  const double frac = t - lower;
  long long index;
  if (frac < 0.5) {
    index = static_cast<long long>(lower);
  } else if (frac > 0.5) {
    index = static_cast<long long>(lower) + 1;
  } else {
    // exact midpoint: smaller of the two neighbouring grid indices
    index = std::min(static_cast<long long>(lower) % levels,
                     (static_cast<long long>(lower) + 1) % levels);
  }
  return static_cast<double>(index % levels) * resolution.step();
}

RfPhases quantize(const RfPhases& phases, PhaseResolution resolution) {
  RfPhases out = phases;
  out.resolution = resolution;
  for (auto& v : out.per_subarray) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = quantize_phase(v(i), resolution);
  }
  return out;
}

CMatrix assemble_rf(const RfPhases& phases) {
  const int m = phases.subarrays();
  const int per = phases.antennas_per_subarray();
  const double scale = 1.0 / std::sqrt(static_cast<double>(per));
  CMatrix rf = CMatrix::Zero(static_cast<Eigen::Index>(m) * per, m);
  for (int l = 0; l < m; ++l) {
    const RVector& v = phases.per_subarray[static_cast<std::size_t>(l)];
    if (v.size() != per) throw DimensionError("assemble_rf: subarrays differ in size");
    for (int i = 0; i < per; ++i) {
      rf(static_cast<Eigen::Index>(l) * per + i, l) = std::polar(scale, v(i));
    }
  }
  return rf;
}

RfPhases phases_from_rf(const CMatrix& rf, int subarrays, double tolerance) {
  if (subarrays < 1 || rf.cols() != subarrays || rf.rows() % subarrays != 0 || rf.rows() == 0) {
    throw StructureError(fmt::format("RF precoder of shape {}x{} cannot hold {} subarrays",
                                     rf.rows(), rf.cols(), subarrays));
  }
  const Eigen::Index per = rf.rows() / subarrays;
  const double modulus = 1.0 / std::sqrt(static_cast<double>(per));
  RfPhases phases = RfPhases::zeros(subarrays, static_cast<int>(per));
  for (Eigen::Index i = 0; i < rf.rows(); ++i) {
    const Eigen::Index owner = i / per;
    for (Eigen::Index l = 0; l < rf.cols(); ++l) {
      const double mag = std::abs(rf(i, l));
      if (l == owner) {
        if (std::abs(mag - modulus) > tolerance) {
          throw StructureError(fmt::format(
              "RF entry ({}, {}) has modulus {}, expected 1/sqrt({})", i, l, mag, per));
        }
        phases.per_subarray[static_cast<std::size_t>(l)](i - owner * per) =
            wrap_phase(std::arg(rf(i, l)));
      } else if (mag > tolerance) {
        throw StructureError(fmt::format("RF entry ({}, {}) lies off the block diagonal", i, l));
      }
    }
  }
  return phases;
}

}  // namespace dpa
