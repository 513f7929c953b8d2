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

#include "dpa/target.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dpa/errors.hpp"

namespace dpa {

SvdBasis svd_basis(const CMatrix& h, int n_streams) {
  const auto min_dim = std::min(h.rows(), h.cols());
  if (n_streams < 1 || n_streams > min_dim) {
    throw DimensionError(fmt::format("svd_basis: {} streams for a {}x{} channel", n_streams,
                                     h.rows(), h.cols()));
  }
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinV);
  return {svd.matrixV().leftCols(n_streams), svd.singularValues().head(n_streams)};
}

RVector water_filling(const RVector& singular_values, double budget, double noise_scale) {
  if (!(budget > 0.0) || !(noise_scale > 0.0)) {
    throw DomainError("water_filling: budget and noise scale must be positive");
  }
  const Eigen::Index n = singular_values.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (singular_values(i) < 0.0 || (i > 0 && singular_values(i) > singular_values(i - 1))) {
      throw DomainError("water_filling: singular values must be non-negative and descending");
    }
  }
  Eigen::Index usable = 0;
  while (usable < n && singular_values(usable) > 0.0) ++usable;
  if (usable == 0) throw DegenerateChannel();

  // floor_i = noise / sigma_i^2 is non-decreasing in i. With the first `active`
  // streams on, mu = (budget + sum floor_i) / active; the active set is right
  // when mu exceeds the floor of its weakest member.
  RVector floors(usable);
  for (Eigen::Index i = 0; i < usable; ++i) {
    floors(i) = noise_scale / (singular_values(i) * singular_values(i));
  }
  double level = 0.0;
  Eigen::Index active = 0;
  double floor_sum = 0.0;
  for (Eigen::Index m = 1; m <= usable; ++m) {
    floor_sum += floors(m - 1);
    const double mu = (budget + floor_sum) / static_cast<double>(m);
    if (mu > floors(m - 1)) {
      level = mu;
      active = m;
    } else {
      break;
    }
  }
  RVector powers = RVector::Zero(n);
  for (Eigen::Index i = 0; i < active; ++i) powers(i) = level - floors(i);
  return powers;
}

double TargetOptions::noise_scale() const {
  return noise == WaterFillingNoise::kStreamScaled ? noise_variance * streams / power
                                                   : noise_variance;
}

std::vector<CMatrix> PrecoderTarget::precoders() const {
  std::vector<CMatrix> out;
  out.reserve(subcarriers.size());
  for (const auto& s : subcarriers) out.push_back(s.precoder);
  return out;
}

SubcarrierTarget build_subcarrier_target(const CMatrix& h, const TargetOptions& options) {
  SvdBasis basis = svd_basis(h, options.streams);
  RVector powers = water_filling(basis.singular_values, options.power, options.noise_scale());
  CMatrix precoder = basis.basis * powers.cwiseSqrt().asDiagonal();
  return {std::move(precoder), std::move(basis.singular_values), std::move(powers)};
}

PrecoderTarget build_target(const ChannelSet& channels, const TargetOptions& options) {
  PrecoderTarget target;
  target.power = options.power;
  target.streams = options.streams;
  target.subcarriers.reserve(static_cast<std::size_t>(channels.subcarriers()));
  for (const auto& h : channels.per_subcarrier) {
    target.subcarriers.push_back(build_subcarrier_target(h, options));
  }
  return target;
}

}  // namespace dpa
