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

#include "dpa/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dpa/altmin.hpp"
#include "dpa/errors.hpp"
#include "dpa/rng.hpp"

namespace dpa {

namespace {

double log2_det_gain(const CMatrix& h, const CMatrix& f, double gain) {
  // Sylvester: det(I_Nr + g H F F^H H^H) = det(I_Ns + g (HF)^H (HF))
  const CMatrix hf = h * f;
  CMatrix m = gain * (hf.adjoint() * hf);
  m.diagonal().array() += 1.0;
  const Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) throw Error("spectral_efficiency: log-det factorization failed");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) log_det += std::log2(llt.matrixLLT()(i, i).real());
  return 2.0 * log_det;
}

void check_power(const CMatrix& f, double power, int k) {
  const double p = f.squaredNorm();
  if (std::abs(p - power) > 1e-6) {
    throw ContractError(fmt::format(
        "spectral_efficiency: precoder {} has power {:.9g}, budget is {:.9g}", k, p, power));
  }
}

}  // namespace

double spectral_efficiency(const ChannelSet& channels, std::span<const CMatrix> precoders,
                           double power, int streams, double noise_variance) {
  if (static_cast<int>(precoders.size()) != channels.subcarriers() || precoders.empty()) {
    throw DimensionError("spectral_efficiency: need one precoder per subcarrier");
  }
  if (!(noise_variance > 0.0) || streams < 1) {
    throw DomainError("spectral_efficiency: noise variance and stream count must be positive");
  }
  const double gain = power / (streams * noise_variance);
  double total = 0.0;
  for (int k = 0; k < channels.subcarriers(); ++k) {
    const CMatrix& f = precoders[static_cast<std::size_t>(k)];
    check_power(f, power, k);
    total += log2_det_gain(channels[k], f, gain);
  }
  return total / channels.subcarriers();
}

double spectral_efficiency(const ChannelSet& channels, const CMatrix& rf,
                           std::span<const CMatrix> basebands, double power, int streams,
                           double noise_variance) {
  std::vector<CMatrix> precoders;
  precoders.reserve(basebands.size());
  for (const auto& bb : basebands) precoders.push_back(rf * bb);
  return spectral_efficiency(channels, precoders, power, streams, noise_variance);
}

Scenario parse_scenario(std::string_view name) {
  if (name == "snr_sweep") return Scenario::kSnrSweep;
  if (name == "bits_sweep") return Scenario::kBitsSweep;
  if (name == "csi_sweep") return Scenario::kCsiSweep;
  throw ConfigError(fmt::format("unknown scenario '{}'", name));
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kSnrSweep: return "snr_sweep";
    case Scenario::kBitsSweep: return "bits_sweep";
    case Scenario::kCsiSweep: return "csi_sweep";
  }
  return "unknown";
}

namespace {

struct Variant {
  PhaseResolution resolution;
  double xi;
};

// One trial at one geometry: every (xi, SNR, variant) point of the sweep.
struct TrialPlan {
  std::vector<Variant> variants;  // ordered; xi-major
  bool tag_geometry = false;
};

std::vector<ExperimentRecord> run_trial(const SystemConfig& config, const TrialPlan& plan,
                                        AntennaPair geometry, int trial, std::uint64_t hash) {
  const ChannelModel model = config.channel_model(geometry);
  const ChannelSet truth = generate_channel(model, config.seed, static_cast<std::uint64_t>(trial),
                                            hash);
  const std::string suffix =
      plan.tag_geometry
          ? fmt::format("/{}x{}", geometry.antennas_per_subarray, geometry.rx_antennas)
          : std::string();

  // one estimate per distinct xi, all from the same error draw
  std::map<double, ChannelSet> estimates;
  for (const auto& v : plan.variants) {
    if (estimates.contains(v.xi)) continue;
    Rng err(config.seed, static_cast<std::uint64_t>(trial), StreamTag::kCsiError, 0);
    estimates.emplace(v.xi, v.xi == 1.0 ? truth : corrupt_csi(truth, v.xi, err));
  }

  std::vector<ExperimentRecord> out;
  for (double snr : config.snr_grid_db) {
    const TargetOptions target_options = config.target_options(snr);
    const PrecoderTarget ideal = build_target(truth, target_options);
    const std::vector<CMatrix> ideal_precoders = ideal.precoders();
    const double digital_se =
        spectral_efficiency(truth, ideal_precoders, config.power, config.streams,
                            target_options.noise_variance);

    std::map<double, PrecoderTarget> designed;
    for (const auto& v : plan.variants) {
      if (!designed.contains(v.xi)) {
        designed.emplace(v.xi, v.xi == 1.0 ? ideal : build_target(estimates.at(v.xi), target_options));
      }
      const HybridPrecoder hp = hybrid_precode(designed.at(v.xi), config.subarrays,
                                               config.altmin_options(v.resolution));
      ExperimentRecord r;
      r.method = "hybrid" + suffix;
      r.snr_db = snr;
      r.trial = trial;
      r.bits = v.resolution;
      r.xi = v.xi;
      r.geometry = geometry;
      r.spectral_efficiency = spectral_efficiency(truth, hp.rf, hp.basebands, config.power,
                                                  config.streams, target_options.noise_variance);
      r.objective = hp.final_objective();
      r.outer_iterations = hp.outer_iterations;
      r.inner_iterations_mean = hp.mean_inner_iterations;
      out.push_back(std::move(r));
    }
    ExperimentRecord d;
    d.method = "fully_digital" + suffix;
    d.snr_db = snr;
    d.trial = trial;
    d.xi = 1.0;
    d.geometry = geometry;
    d.spectral_efficiency = digital_se;
    out.push_back(std::move(d));
  }
  return out;
}

// Runs job(i) for i in [0, n) on `threads` workers; results land in slot i.
template <typename Result, typename Job>
std::vector<Result> parallel_map(int n, int threads, Job job) {
  std::vector<Result> results(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = job(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const int count = std::max(1, std::min(threads, n));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

ExperimentResult run_experiment(const SystemConfig& config, Scenario scenario) {
  validate(config);
  TrialPlan plan;
  std::vector<AntennaPair> geometries{{config.antennas_per_subarray, config.rx_antennas}};
  switch (scenario) {
    case Scenario::kSnrSweep:
      plan.variants.push_back({config.bits.front(), config.xi.front()});
      break;
    case Scenario::kBitsSweep:
      for (const auto& b : config.bits) plan.variants.push_back({b, config.xi.front()});
      break;
    case Scenario::kCsiSweep:
      for (double xi : config.xi) plan.variants.push_back({config.bits.front(), xi});
      geometries = config.geometries();
      plan.tag_geometry = true;
      break;
  }

  const std::uint64_t hash = config_hash(config);
  const int threads = config.threads > 0
                          ? config.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int n_geom = static_cast<int>(geometries.size());
  const int jobs = n_geom * config.trials;
  auto per_job = parallel_map<std::vector<ExperimentRecord>>(jobs, threads, [&](int j) {
    return run_trial(config, plan, geometries[static_cast<std::size_t>(j / config.trials)],
                     j % config.trials, hash);
  });

  // Order: geometry, xi, SNR, trial, then method variant.
  ExperimentResult result;
  result.scenario = scenario;
  const std::size_t per_snr = plan.variants.size() + 1;
  std::vector<double> xis;
  for (const auto& v : plan.variants) {
    if (std::find(xis.begin(), xis.end(), v.xi) == xis.end()) xis.push_back(v.xi);
  }
  for (int g = 0; g < n_geom; ++g) {
    for (double xi : xis) {
      for (std::size_t s = 0; s < config.snr_grid_db.size(); ++s) {
        for (int t = 0; t < config.trials; ++t) {
          const auto& recs = per_job[static_cast<std::size_t>(g * config.trials + t)];
          const std::size_t base = s * per_snr;
          for (std::size_t v = 0; v < plan.variants.size(); ++v) {
            if (plan.variants[v].xi == xi) result.records.push_back(recs[base + v]);
          }
          // baseline rows follow the first xi block only, so each is written once
          if (xi == xis.front()) result.records.push_back(recs[base + plan.variants.size()]);
        }
      }
    }
  }
  return result;
}

std::vector<SummaryRow> ExperimentResult::summarize() const {
  struct Acc {
    std::string curve;
    double snr;
    double sum = 0.0, sum_sq = 0.0;
    int n = 0;
  };
  std::vector<Acc> accs;
  std::map<std::pair<std::string, double>, std::size_t> index;
  for (const auto& r : records) {
    std::string curve = r.method;
    if (r.bits) curve += fmt::format(" B={}", format_resolution(*r.bits));
    if (scenario == Scenario::kCsiSweep && r.bits) curve += fmt::format(" xi={}", r.xi);
    const auto key = std::make_pair(curve, r.snr_db);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, accs.size()).first;
      accs.push_back({curve, r.snr_db});
    }
    Acc& a = accs[it->second];
    a.sum += r.spectral_efficiency;
    a.sum_sq += r.spectral_efficiency * r.spectral_efficiency;
    ++a.n;
  }
  std::map<std::string, std::size_t> curve_order;
  for (const auto& a : accs) curve_order.emplace(a.curve, curve_order.size());
  std::stable_sort(accs.begin(), accs.end(), [&](const Acc& x, const Acc& y) {
    const auto cx = curve_order.at(x.curve);
    const auto cy = curve_order.at(y.curve);
    return cx != cy ? cx < cy : x.snr < y.snr;
  });
  std::vector<SummaryRow> rows;
  for (const auto& a : accs) {
    const double mean = a.sum / a.n;
    double se = 0.0;
    if (a.n > 1) {
      const double var = std::max(0.0, (a.sum_sq - a.n * mean * mean) / (a.n - 1));
      se = std::sqrt(var / a.n);
    }
    rows.push_back({a.curve, a.snr, mean, se, a.n});
  }
  return rows;
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,snr_db,trial,bits,xi,se_bits_per_hz,objective,outer_iters,inner_iters_mean\n";
  for (const auto& r : result.records) {
    fmt::print(out, "{},{},{},{},{},{:.12g},{:.12g},{},{:.6g}\n", r.method, r.snr_db, r.trial,
               r.bits ? format_resolution(*r.bits) : std::string("-"), r.xi,
               r.spectral_efficiency, r.objective, r.outer_iterations, r.inner_iterations_mean);
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "curve,snr_db,mean_se,std_error,trials\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{:.12g},{:.6g},{}\n", r.curve, r.snr_db, r.mean, r.standard_error,
               r.count);
  }
}

std::vector<ComplexityRow> complexity_probe(const ComplexityProbeOptions& options) {
  using Clock = std::chrono::steady_clock;
  if (options.iterations < 1 || options.repetitions < 1 || options.antennas_per_subarray < 1) {
    throw DomainError("complexity_probe: iterations, repetitions and antennas must be positive");
  }
  std::vector<ComplexityRow> rows;
  for (const auto& [subarrays, streams] : options.grid) {
    if (subarrays < 1 || streams < 1 || streams > subarrays) {
      throw DimensionError(fmt::format("complexity_probe: invalid (M_t, N_s) = ({}, {})",
                                       subarrays, streams));
    }
    Rng rng(options.seed, static_cast<std::uint64_t>(subarrays * 1000 + streams),
            StreamTag::kSynthetic, 0);
    const int n_total = subarrays * options.antennas_per_subarray;
    AdmmOptions admm;
    admm.eps_primal = 0.0;  // never met: every solve runs the full budget
    admm.eps_dual = 0.0;
    admm.max_iters = options.iterations;
    admm.recompute_linear_term = options.recompute_linear_term;

    std::vector<double> samples;
    // first run warms caches and is discarded
    for (int rep = 0; rep <= options.repetitions; ++rep) {
      RfPhases phases = RfPhases::zeros(subarrays, options.antennas_per_subarray);
      for (auto& v : phases.per_subarray) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = kTwoPi * rng.uniform();
      }
      CMatrix target(n_total, streams);
      for (Eigen::Index i = 0; i < target.size(); ++i) target(i) = rng.complex_normal();
      target *= std::sqrt(static_cast<double>(streams)) / target.norm();
      const RealLiftedSystem system = build_real_system(phases, target, streams);

      const auto start = Clock::now();
      const AdmmReport report = admm_solve(system, admm);
      const auto stop = Clock::now();
      if (rep == 0) continue;
      samples.push_back(std::chrono::duration<double>(stop - start).count() / report.iterations);
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var = samples.size() > 1 ? var / static_cast<double>(samples.size() - 1) : 0.0;
    rows.push_back({subarrays, streams, mean, mean > 0.0 ? std::sqrt(var) / mean : 0.0});
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DimensionError("loglog_slope: need at least two matching points");
  }
  double mx = 0.0, my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace dpa
