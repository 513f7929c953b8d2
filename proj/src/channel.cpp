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

#include "dpa/channel.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dpa/errors.hpp"

namespace dpa {

CVector array_response(int n_antennas, double spacing_over_wavelength, double angle) {
  if (n_antennas < 1) {
    throw DimensionError("array_response: need at least one antenna, got " +
                         std::to_string(n_antennas));
  }
  const double step = kTwoPi * spacing_over_wavelength * std::sin(angle);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
  CVector a(n_antennas);
  for (int n = 0; n < n_antennas; ++n) {
    a(n) = std::polar(scale, step * n);
  }
  return a;
}

ClusterRayParams sample_cluster_params(Rng& rng, int n_clusters, int n_rays,
                                       double angular_spread) {
  if (n_clusters < 1 || n_rays < 1) {
    throw DimensionError(fmt::format("sample_cluster_params: need clusters, rays >= 1 (got {}, {})",
                                     n_clusters, n_rays));
  }
  if (!(angular_spread > 0.0)) {
    throw DomainError("sample_cluster_params: angular spread must be positive");
  }
  ClusterRayParams p{CMatrix(n_clusters, n_rays), RMatrix(n_clusters, n_rays),
                     RMatrix(n_clusters, n_rays)};
  for (int i = 0; i < n_clusters; ++i) {
    const double mean_departure = kTwoPi * rng.uniform();
    const double mean_arrival = kTwoPi * rng.uniform();
    for (int l = 0; l < n_rays; ++l) {
      p.departure(i, l) = wrap_phase(mean_departure + rng.laplacian(angular_spread));
      p.arrival(i, l) = wrap_phase(mean_arrival + rng.laplacian(angular_spread));
      p.gains(i, l) = rng.complex_normal();
    }
  }
  return p;
}

CMatrix subarray_channel(const ClusterRayParams& params, const ChannelGeometry& geometry, int k,
                         int n_subcarriers) {
  if (n_subcarriers < 1 || k < 0 || k >= n_subcarriers) {
    throw IndexError(fmt::format("subarray_channel: subcarrier {} outside [0, {})", k,
                                 n_subcarriers));
  }
  const int n_tx = geometry.antennas_per_subarray;
  const int n_rx = geometry.rx_antennas;
  const double gamma = std::sqrt(static_cast<double>(n_tx) * n_rx /
                                 (static_cast<double>(params.clusters()) * params.rays()));
  CMatrix h = CMatrix::Zero(n_rx, n_tx);
  for (int i = 0; i < params.clusters(); ++i) {
    // cluster i (1-based) carries delay tap i
    const Complex tap =
        std::polar(1.0, -kTwoPi * static_cast<double>(i + 1) * k / n_subcarriers);
    for (int l = 0; l < params.rays(); ++l) {
      const CVector a_r =
          array_response(n_rx, geometry.spacing_over_wavelength, params.arrival(i, l));
      const CVector a_t =
          array_response(n_tx, geometry.spacing_over_wavelength, params.departure(i, l));
      h.noalias() += (params.gains(i, l) * tap) * a_r * a_t.adjoint();
    }
  }
  return gamma * h;
}

ChannelSet assemble_channel(std::span<const std::vector<CMatrix>> blocks, int n_subcarriers) {
  if (blocks.empty()) throw DimensionError("assemble_channel: no subarrays");
  const auto& first = blocks.front();
  if (static_cast<int>(first.size()) != n_subcarriers || n_subcarriers < 1) {
    throw DimensionError("assemble_channel: subarray 0 does not hold K subcarrier matrices");
  }
  const Eigen::Index rows = first.front().rows();
  const Eigen::Index cols = first.front().cols();
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    if (static_cast<int>(blocks[m].size()) != n_subcarriers) {
      throw DimensionError(fmt::format("assemble_channel: subarray {} has {} subcarriers, want {}",
                                       m, blocks[m].size(), n_subcarriers));
    }
    for (const auto& h : blocks[m]) {
      if (h.rows() != rows || h.cols() != cols) {
        throw DimensionError(fmt::format("assemble_channel: subarray {} block is {}x{}, want {}x{}",
                                         m, h.rows(), h.cols(), rows, cols));
      }
    }
  }
  const auto n_sub = static_cast<Eigen::Index>(blocks.size());
  ChannelSet set;
  set.subarrays = static_cast<int>(n_sub);
  set.antennas_per_subarray = static_cast<int>(cols);
  set.per_subcarrier.reserve(static_cast<std::size_t>(n_subcarriers));
  for (int k = 0; k < n_subcarriers; ++k) {
    CMatrix h(rows, cols * n_sub);
    for (Eigen::Index m = 0; m < n_sub; ++m) {
      h.middleCols(m * cols, cols) = blocks[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
    }
    set.per_subcarrier.push_back(std::move(h));
  }
  return set;
}

ChannelSet corrupt_csi(const ChannelSet& channels, double xi, Rng& rng) {
  if (!(xi >= 0.0 && xi <= 1.0)) {
    throw DomainError(fmt::format("corrupt_csi: accuracy xi = {} outside [0, 1]", xi));
  }
  const double error_weight = std::sqrt(1.0 - xi * xi);
  ChannelSet estimate = channels;
  for (auto& h : estimate.per_subcarrier) {
    CMatrix e(h.rows(), h.cols());
    // column-major fill keeps the draw order fixed
    for (Eigen::Index c = 0; c < e.cols(); ++c) {
      for (Eigen::Index r = 0; r < e.rows(); ++r) e(r, c) = rng.complex_normal();
    }
    h = xi * h + error_weight * e;
  }
  return estimate;
}

ChannelSet generate_channel(const ChannelModel& model, std::uint64_t seed, std::uint64_t trial,
                            std::uint64_t config_hash) {
  const auto& g = model.geometry;
  if (g.subarrays < 1 || g.antennas_per_subarray < 1 || g.rx_antennas < 1) {
    throw DimensionError("generate_channel: all array dimensions must be positive");
  }
  std::vector<std::vector<CMatrix>> blocks(static_cast<std::size_t>(g.subarrays));
  for (int m = 0; m < g.subarrays; ++m) {
    Rng rng(seed, trial, StreamTag::kChannel, static_cast<std::uint64_t>(m));
    const ClusterRayParams params =
        sample_cluster_params(rng, model.clusters, model.rays, model.angular_spread);
    auto& per_k = blocks[static_cast<std::size_t>(m)];
    per_k.reserve(static_cast<std::size_t>(model.subcarriers));
    for (int k = 0; k < model.subcarriers; ++k) {
      per_k.push_back(subarray_channel(params, g, k, model.subcarriers));
    }
  }
  ChannelSet set = assemble_channel(blocks, model.subcarriers);
  set.seed = seed;
  set.config_hash = config_hash;
  return set;
}

void write_channel_dump(std::ostream& out, const ChannelSet& channels) {
  const int n_sub = channels.antennas_per_subarray;
  fmt::print(out, "# dpa channel dump v1\n");
  fmt::print(out, "seed {}\nconfig_hash {:016x}\n", channels.seed, channels.config_hash);
  fmt::print(out, "M_t {}\nN_t_sub {}\nN_r {}\nK {}\n", channels.subarrays, n_sub,
             channels.rx_antennas(), channels.subcarriers());
  for (int m = 0; m < channels.subarrays; ++m) {
    for (int k = 0; k < channels.subcarriers(); ++k) {
      fmt::print(out, "block m={} k={}\n", m, k);
      const auto block = channels[k].middleCols(static_cast<Eigen::Index>(m) * n_sub, n_sub);
      for (Eigen::Index r = 0; r < block.rows(); ++r) {
        for (Eigen::Index c = 0; c < block.cols(); ++c) {
          fmt::print(out, "{}{:.17g},{:.17g}", c == 0 ? "" : " ", block(r, c).real(),
                     block(r, c).imag());
        }
        out << '\n';
      }
    }
  }
}

}  // namespace dpa
