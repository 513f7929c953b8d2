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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "dpa/errors.hpp"
#include "dpa/target.hpp"
#include "test_support.hpp"

using namespace dpa;

namespace {

// Projector distance between the column spans of two orthonormal bases.
double subspace_distance(const CMatrix& a, const CMatrix& b) {
  return (a * a.adjoint() - b * b.adjoint()).norm();
}

// Reference water-filling: bisection on the water level.
RVector bisection_water_filling(const RVector& sv, double budget, double noise_scale) {
  auto total = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 0) s += std::max(0.0, mu - noise_scale / (sv(i) * sv(i)));
    }
    return s;
  };
  double lo = 0.0, hi = budget;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 0) hi = std::max(hi, budget + noise_scale / (sv(i) * sv(i)));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < budget ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  RVector p(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    p(i) = sv(i) > 0 ? std::max(0.0, mu - noise_scale / (sv(i) * sv(i))) : 0.0;
  }
  return p;
}

double capacity(const RVector& sv, const RVector& p, double noise_scale) {
  double c = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) c += std::log2(1.0 + p(i) * sv(i) * sv(i) / noise_scale);
  return c;
}

}  // namespace

TEST_CASE("svd_basis examples") {
  const SvdBasis eye = svd_basis(CMatrix::Identity(4, 4), 2);
  CHECK(std::abs(eye.singular_values(0) - 1.0) < 1e-14);
  CHECK(std::abs(eye.singular_values(1) - 1.0) < 1e-14);
  CHECK((eye.basis.adjoint() * eye.basis - CMatrix::Identity(2, 2)).norm() < 1e-12);

  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = 2.0;
  d(2, 2) = 1.0;
  const SvdBasis top = svd_basis(d, 2);
  CHECK(std::abs(top.singular_values(0) - 3.0) < 1e-14);
  CHECK(std::abs(top.singular_values(1) - 2.0) < 1e-14);
  CHECK(std::abs(std::abs(top.basis(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(top.basis(1, 1)) - 1.0) < 1e-12);

  CHECK_THROWS_AS(svd_basis(CMatrix::Identity(2, 3), 3), DimensionError);
  CHECK_THROWS_AS(svd_basis(CMatrix::Identity(2, 3), 0), DimensionError);
}

TEST_CASE("svd_basis agrees with the eigen-decomposition of H^H H") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const CMatrix h = testing::random_complex(rng, 8, 32);
    const SvdBasis s = svd_basis(h, 2);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h.adjoint() * h);
    const Eigen::Index n = eig.eigenvalues().size();
    const CMatrix top = eig.eigenvectors().rightCols(2).rowwise().reverse();
    CHECK(subspace_distance(s.basis, top) < 1e-8);
    CHECK(std::abs(s.singular_values(0) - std::sqrt(eig.eigenvalues()(n - 1))) < 1e-9);
    CHECK(std::abs(s.singular_values(1) - std::sqrt(eig.eigenvalues()(n - 2))) < 1e-9);
    // H V has orthogonal columns of norms sigma_i
    const CMatrix hv = h * s.basis;
    const CMatrix gram = hv.adjoint() * hv;
    CHECK(std::abs(gram(0, 1)) < 1e-9);
    CHECK(std::abs(std::sqrt(gram(0, 0).real()) - s.singular_values(0)) < 1e-9);
  }
}

TEST_CASE("water_filling examples") {
  RVector two(2);
  two << 1.0, 1.0;
  const RVector equal = water_filling(two, 2.0, 1.0);
  CHECK(std::abs(equal(0) - 1.0) < 1e-12);
  CHECK(std::abs(equal(1) - 1.0) < 1e-12);

  two << 1.0, 0.0;
  const RVector single = water_filling(two, 2.0, 1.0);
  CHECK(std::abs(single(0) - 2.0) < 1e-12);
  CHECK(single(1) == 0.0);

  CHECK_THROWS_AS(water_filling(RVector::Zero(3), 1.0, 1.0), DegenerateChannel);
}

TEST_CASE("water_filling matches an exhaustive grid search") {
  RVector sv(2);
  sv << 2.0, 1.0;
  const RVector p = water_filling(sv, 2.0, 1.0);
  // closed form: mu = (P + 1/4 + 1) / 2
  CHECK(std::abs(p(0) - 1.375) < 1e-12);
  CHECK(std::abs(p(1) - 0.625) < 1e-12);

  constexpr int n = 1000000;
  double best = -1.0, best_p0 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double p0 = 2.0 * i / n;
    RVector q(2);
    q << p0, 2.0 - p0;
    const double c = capacity(sv, q, 1.0);
    if (c > best) {
      best = c;
      best_p0 = p0;
    }
  }
  CHECK(std::abs(best_p0 - p(0)) < 1e-5);
  CHECK(capacity(sv, p, 1.0) >= best - 1e-12);
}

TEST_CASE("water_filling satisfies KKT and matches bisection") {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    RVector sv(n);
    for (int i = 0; i < n; ++i) sv(i) = 0.05 + 3.0 * rng.uniform();
    std::sort(sv.data(), sv.data() + n, std::greater<>());
    const double budget = 0.1 + 5.0 * rng.uniform();
    const double noise = 0.01 + 2.0 * rng.uniform();
    const RVector p = water_filling(sv, budget, noise);
    CHECK(std::abs(p.sum() - budget) < 1e-10 * budget);
    CHECK(p.minCoeff() >= 0.0);
    // active streams share one water level, inactive ones sit above it
    double level = -1.0;
    for (int i = 0; i < n; ++i) {
      if (p(i) > 0) {
        const double mu = p(i) + noise / (sv(i) * sv(i));
        if (level < 0) level = mu;
        CHECK(std::abs(mu - level) < 1e-9 * (1 + level));
      }
    }
    for (int i = 0; i < n; ++i) {
      if (p(i) == 0) CHECK(noise / (sv(i) * sv(i)) >= level - 1e-9);
    }
    CHECK((p - bisection_water_filling(sv, budget, noise)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("water_filling input checks") {
  RVector up(2);
  up << 1.0, 2.0;
  CHECK_THROWS_AS(water_filling(up, 1.0, 1.0), DomainError);
  RVector neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(water_filling(neg, 1.0, 1.0), DomainError);
}

TEST_CASE("build_subcarrier_target") {
  TargetOptions opt;
  opt.streams = 1;
  opt.power = 1.0;
  opt.noise_variance = 1.0;
  const SubcarrierTarget eye = build_subcarrier_target(CMatrix::Identity(4, 4), opt);
  CHECK(std::abs(eye.precoder.norm() - 1.0) < 1e-12);

  Rng rng(13);
  opt.streams = 2;
  opt.power = 2.0;
  opt.noise_variance = 0.7;
  const CMatrix h = testing::random_complex(rng, 4, 16);
  const SubcarrierTarget t = build_subcarrier_target(h, opt);
  CHECK(std::abs(t.precoder.squaredNorm() - 2.0) < 1e-10);
  const CMatrix gram = t.precoder.adjoint() * t.precoder;
  CHECK(std::abs(gram(0, 1)) < 1e-10);
  CHECK(std::abs(gram(0, 0).real() - t.powers(0)) < 1e-10);

  // no other precoder with the same power carries more rate
  const double gain = opt.power / (opt.streams * opt.noise_variance);
  const double best = testing::direct_rate(h, t.precoder, gain);
  for (int i = 0; i < 1000; ++i) {
    const CMatrix f = testing::random_with_power(rng, 16, 2, opt.power);
    CHECK(testing::direct_rate(h, f, gain) <= best + 1e-9);
  }
}

TEST_CASE("build_target covers every subcarrier") {
  ChannelModel model;
  model.geometry = {2, 4, 4, 0.5};
  model.subcarriers = 8;
  model.angular_spread = 0.17;
  const ChannelSet h = generate_channel(model, 1, 0);
  TargetOptions opt;
  opt.streams = 2;
  opt.power = 2.0;
  opt.noise_variance = 1.0;
  const PrecoderTarget target = build_target(h, opt);
  REQUIRE(target.size() == 8);
  CHECK(target.power == 2.0);
  CHECK(target.streams == 2);
  for (int k = 0; k < 8; ++k) {
    CHECK(target.precoder(k).rows() == 8);
    CHECK(target.precoder(k).cols() == 2);
    CHECK(std::abs(target.precoder(k).squaredNorm() - 2.0) < 1e-10);
  }
  CHECK(target.precoders().size() == 8);
}
