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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <fmt/format.h>

#include "dpa/admm.hpp"
#include "dpa/altmin.hpp"
#include "dpa/channel.hpp"
#include "dpa/config.hpp"
#include "dpa/evaluation.hpp"
#include "dpa/rf.hpp"
#include "dpa/rng.hpp"
#include "dpa/target.hpp"

namespace fs = std::filesystem;
using namespace dpa;

namespace {

// Tolerances and sizes, fixed here.
constexpr int kOracleInstances = 200;
constexpr double kOracleRelTol = 1e-4;
constexpr double kOracleObjTol = 1e-6;
constexpr double kOracleSeconds = 60.0;
constexpr int kStructureSamples = 1000;
constexpr double kGramTol = 1e-12;
constexpr double kNormTol = 1e-10;
constexpr int kPlantedSeeds = 100;
constexpr int kPlantedRequired = 95;
constexpr double kPlantedTol = 1e-6;
constexpr int kDescentInstances = 100;
constexpr double kDescentSlack = 1e-9;
constexpr int kWaterSets = 100;
constexpr double kWaterTol = 1e-6;
constexpr int kTrendTrials = 100;
constexpr double kTrendSnrDb = 0.0;
constexpr double kFourBitRatio = 0.95;
constexpr double kBoundSlack = 1e-9;
constexpr double kSlopeLow = 1.5;
constexpr double kSlopeHigh = 2.5;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("{} [{:2}] {}: {}\n", pass ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
}

void info(const std::string& text) {
  fmt::print("     info: {}\n", text);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RfPhases random_phases(Rng& rng, int subarrays, int per) {
  RfPhases p = RfPhases::zeros(subarrays, per);
  for (auto& v : p.per_subarray) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = kTwoPi * rng.uniform();
  }
  return p;
}

CMatrix random_with_power(Rng& rng, Eigen::Index rows, Eigen::Index cols, double power) {
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.complex_normal();
  return m * (std::sqrt(power) / m.norm());
}

SystemConfig load_checked_in(const std::string& name) {
  return load_config(std::string(DPA_SOURCE_DIR) + "/configs/" + name + ".cfg");
}

// ---------------------------------------------------------------------------

void oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_rel = 0.0, worst_obj = 0.0;
  int converged = 0, with_fixed_point = 0;
  for (int t = 0; t < kOracleInstances; ++t) {
    Rng rng(1, static_cast<std::uint64_t>(t), StreamTag::kSynthetic, 1);
    const RfPhases phases = random_phases(rng, 4, 8);
    const CMatrix target = random_with_power(rng, 32, 2, 2.0);
    const RealLiftedSystem s = build_real_system(phases, target, 2.0);
    const AdmmReport r = admm_solve(s, AdmmOptions{});
    const OracleSolution o = sphere_ls_oracle(s);
    worst_rel = std::max(worst_rel, (r.solution - o.solution).norm() / o.solution.norm());
    worst_obj = std::max(worst_obj, std::abs(r.objective - o.objective));
    converged += r.converged;
    with_fixed_point += has_fixed_point(s, 1.0);
  }
  const double elapsed = seconds_since(t0);
  report(1, "oracle equivalence",
         worst_rel <= kOracleRelTol && worst_obj <= kOracleObjTol && elapsed < kOracleSeconds,
         fmt::format("{} instances, max rel err {:.2e} (<= {:.0e}), max |obj diff| {:.2e} "
                     "(<= {:.0e}), {:.1f} s (< {:.0f} s)",
                     kOracleInstances, worst_rel, kOracleRelTol, worst_obj, kOracleObjTol, elapsed,
                     kOracleSeconds));
  info(fmt::format("rho = 1: {} / {} solves met the stopping rule; {} instances have a fixed "
                   "point (||A^T b|| > sqrt(c)/2); the rest return their best iterate, the start",
                   converged, kOracleInstances, with_fixed_point));

  // the same instances from a cold start y = sqrt(c) e_1
  for (double rho : {1.0, 2.5}) {
    int cold_converged = 0;
    double cold_rel = 0.0;
    for (int t = 0; t < kOracleInstances; ++t) {
      Rng rng(1, static_cast<std::uint64_t>(t), StreamTag::kSynthetic, 1);
      const RfPhases phases = random_phases(rng, 4, 8);
      const CMatrix target = random_with_power(rng, 32, 2, 2.0);
      const RealLiftedSystem s = build_real_system(phases, target, 2.0);
      AdmmState start = initial_state(s);
      start.y.setZero();
      start.y(0) = std::sqrt(s.radius_sq);
      AdmmOptions opt;
      opt.rho = rho;
      const AdmmReport r = admm_solve(s, opt, start);
      const OracleSolution o = sphere_ls_oracle(s);
      cold_converged += r.converged;
      cold_rel = std::max(cold_rel, (r.solution - o.solution).norm() / o.solution.norm());
    }
    info(fmt::format("cold start, rho = {}: {} / {} converged, max rel err {:.2e}", rho,
                     cold_converged, kOracleInstances, cold_rel));
  }
}

void structural_invariants() {
  double worst_gram = 0.0, worst_norm = 0.0;
  for (int t = 0; t < kStructureSamples; ++t) {
    Rng rng(2, static_cast<std::uint64_t>(t), StreamTag::kSynthetic, 2);
    const CMatrix rf = assemble_rf(random_phases(rng, 4, 8));
    worst_gram = std::max(
        worst_gram, (rf.adjoint() * rf - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff());
    const CMatrix bb = random_with_power(rng, 4, 2, 1.0 + 9.0 * rng.uniform());
    worst_norm = std::max(worst_norm, std::abs((rf * bb).norm() - bb.norm()));
  }
  report(2, "structural invariants", worst_gram <= kGramTol && worst_norm <= kNormTol,
         fmt::format("{} phase draws, max |F^H F - I| {:.2e} (<= {:.0e}), max | ||F B|| - ||B|| | "
                     "{:.2e} (<= {:.0e})",
                     kStructureSamples, worst_gram, kGramTol, worst_norm, kNormTol));
}

void planted_recovery() {
  constexpr int subarrays = 4, per = 8, streams = 2, subcarriers = 32;
  constexpr double power = 2.0;
  int recovered = 0, max_outer = 0;
  double worst = 0.0;
  for (int seed = 0; seed < kPlantedSeeds; ++seed) {
    Rng rng(3, static_cast<std::uint64_t>(seed), StreamTag::kSynthetic, 3);
    const CMatrix rf = assemble_rf(random_phases(rng, subarrays, per));
    PrecoderTarget target;
    target.power = power;
    target.streams = streams;
    for (int k = 0; k < subcarriers; ++k) {
      target.subcarriers.push_back(
          {rf * random_with_power(rng, subarrays, streams, power), RVector(), RVector()});
    }
    const HybridPrecoder h = hybrid_precode(target, subarrays, AltMinOptions{});
    const double tol = kPlantedTol * subcarriers * power;
    if (h.final_objective() < tol && h.outer_iterations <= 50) ++recovered;
    worst = std::max(worst, h.final_objective() / (subcarriers * power));
    max_outer = std::max(max_outer, h.outer_iterations);
  }
  report(3, "planted-solution recovery", recovered >= kPlantedRequired,
         fmt::format("{} / {} seeds below {:.0e} K P (need {}), worst objective / (K P) {:.2e}, "
                     "max outer iterations {}",
                     recovered, kPlantedSeeds, kPlantedTol, kPlantedRequired, worst, max_outer));
}

void monotone_descent() {
  const SystemConfig c = load_checked_in("fig3a");
  int violations = 0, steps = 0;
  double worst_rise = 0.0;
  for (int t = 0; t < kDescentInstances; ++t) {
    const ChannelSet h = generate_channel(c.channel_model(c.geometries().front()), 4,
                                          static_cast<std::uint64_t>(t));
    const double snr = c.snr_grid_db[static_cast<std::size_t>(t) % c.snr_grid_db.size()];
    const PrecoderTarget target = build_target(h, c.target_options(snr));
    const HybridPrecoder hp =
        hybrid_precode(target, c.subarrays, c.altmin_options(PhaseResolution::infinite()));
    for (std::size_t n = 1; n < hp.objective_trace.size(); ++n) {
      ++steps;
      const double rise = hp.objective_trace[n] - hp.objective_trace[n - 1];
      worst_rise = std::max(worst_rise, rise);
      if (rise > kDescentSlack) ++violations;
    }
  }
  report(4, "monotone descent", violations == 0,
         fmt::format("{} fig3a-sized instances, {} steps, {} rises above {:.0e}, largest step "
                     "change {:+.2e}",
                     kDescentInstances, steps, violations, kDescentSlack, worst_rise));
}

// Bisection on the water level, independent of the breakpoint method.
RVector bisection_allocation(const RVector& sv, double budget, double noise) {
  auto used = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 0) s += std::max(0.0, mu - noise / (sv(i) * sv(i)));
    }
    return s;
  };
  double lo = 0.0, hi = budget + noise / (sv.minCoeff() * sv.minCoeff());
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    (used(mid) < budget ? lo : hi) = mid;
  }
  RVector p(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    p(i) = std::max(0.0, 0.5 * (lo + hi) - noise / (sv(i) * sv(i)));
  }
  return p;
}

// Exhaustive split for two streams on a grid of 10^6 + 1 points.
double grid_first_power(const RVector& sv, double budget, double noise) {
  constexpr int n = 1000000;
  double best = -1.0, arg = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double p0 = budget * i / n;
    const double c = std::log2(1 + p0 * sv(0) * sv(0) / noise) +
                     std::log2(1 + (budget - p0) * sv(1) * sv(1) / noise);
    if (c > best) {
      best = c;
      arg = p0;
    }
  }
  return arg;
}

void water_filling_oracle() {
  double worst = 0.0, worst_grid = 0.0;
  for (int t = 0; t < kWaterSets; ++t) {
    Rng rng(5, static_cast<std::uint64_t>(t), StreamTag::kSynthetic, 5);
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    RVector sv(n);
    for (int i = 0; i < n; ++i) sv(i) = 0.05 + 5.0 * rng.uniform();
    std::sort(sv.data(), sv.data() + n, std::greater<>());
    const double budget = 0.5 + 8.0 * rng.uniform();
    const double noise = 0.05 + 3.0 * rng.uniform();
    const RVector p = water_filling(sv, budget, noise);
    worst = std::max(worst, (p - bisection_allocation(sv, budget, noise)).cwiseAbs().sum());
    if (t < 10) {
      const RVector two = sv.head(2);
      const RVector q = water_filling(two, budget, noise);
      // grid spacing budget / 10^6 bounds the grid oracle's own error
      worst_grid = std::max(worst_grid, 2.0 * std::abs(q(0) - grid_first_power(two, budget, noise)) -
                                            budget / 1e6);
    }
  }
  report(5, "water-filling oracle", worst <= kWaterTol && worst_grid <= kWaterTol,
         fmt::format("{} sets, max total power displacement vs bisection {:.2e}, vs 10^6-point "
                     "grid (two streams, net of grid spacing) {:.2e} (<= {:.0e})",
                     kWaterSets, worst, std::max(0.0, worst_grid), kWaterTol));
}

std::map<std::string, double> means_at(const ExperimentResult& r, double snr) {
  std::map<std::string, double> out;
  for (const auto& row : r.summarize()) {
    if (row.snr_db == snr) out[row.curve] = row.mean;
  }
  return out;
}

int bound_violations(const ExperimentResult& r, int& hybrid_records, double& worst_gap) {
  std::map<std::tuple<std::string, double, int>, double> digital;
  auto geometry_key = [](const ExperimentRecord& rec) {
    return fmt::format("{}x{}", rec.geometry.antennas_per_subarray, rec.geometry.rx_antennas);
  };
  for (const auto& rec : r.records) {
    if (!rec.bits) digital[{geometry_key(rec), rec.snr_db, rec.trial}] = rec.spectral_efficiency;
  }
  int violations = 0;
  for (const auto& rec : r.records) {
    if (!rec.bits) continue;
    ++hybrid_records;
    const double gap =
        rec.spectral_efficiency - digital.at({geometry_key(rec), rec.snr_db, rec.trial});
    worst_gap = std::max(worst_gap, gap);
    if (gap > kBoundSlack) ++violations;
  }
  return violations;
}

ExperimentResult bits_trend() {
  SystemConfig c = load_checked_in("fig3b");
  c.snr_grid_db = {kTrendSnrDb};
  c.trials = kTrendTrials;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(c, Scenario::kBitsSweep);
  const auto m = means_at(r, kTrendSnrDb);
  const std::vector<std::string> order{"hybrid B=1", "hybrid B=2", "hybrid B=3", "hybrid B=4",
                                       "hybrid B=inf"};
  bool monotone = true;
  std::string listing;
  for (std::size_t i = 0; i < order.size(); ++i) {
    listing += fmt::format("{}{} {:.4f}", i ? ", " : "", order[i].substr(7), m.at(order[i]));
    if (i > 0 && m.at(order[i]) < m.at(order[i - 1])) monotone = false;
  }
  const double ratio = m.at("hybrid B=4") / m.at("hybrid B=inf");
  report(6, "phase-resolution trend", monotone && ratio >= kFourBitRatio,
         fmt::format("{} trials at {} dB, mean SE [{}], SE(4)/SE(inf) {:.4f} (>= {}), "
                     "fully digital {:.4f}, {:.0f} s",
                     kTrendTrials, kTrendSnrDb, listing, ratio, kFourBitRatio,
                     m.at("fully_digital"), seconds_since(t0)));
  return r;
}

ExperimentResult csi_trend() {
  SystemConfig c = load_checked_in("fig3c");
  c.snr_grid_db = {kTrendSnrDb};
  c.trials = kTrendTrials;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(c, Scenario::kCsiSweep);
  const auto m = means_at(r, kTrendSnrDb);
  auto curve = [](AntennaPair g, double xi) {
    return fmt::format("hybrid/{}x{} B=inf xi={}", g.antennas_per_subarray, g.rx_antennas, xi);
  };
  bool xi_monotone = true, antenna_monotone = true;
  std::string listing;
  const auto geometries = c.geometries();
  for (std::size_t g = 0; g < geometries.size(); ++g) {
    listing += fmt::format("{}{}x{}:", g ? "; " : "", geometries[g].antennas_per_subarray,
                           geometries[g].rx_antennas);
    for (std::size_t x = 0; x < c.xi.size(); ++x) {
      const double v = m.at(curve(geometries[g], c.xi[x]));
      listing += fmt::format(" {:.3f}", v);
      if (x > 0 && v < m.at(curve(geometries[g], c.xi[x - 1]))) xi_monotone = false;
      if (g > 0 && v < m.at(curve(geometries[g - 1], c.xi[x]))) antenna_monotone = false;
    }
  }
  report(7, "CSI-quality and antenna trends", xi_monotone && antenna_monotone,
         fmt::format("{} trials at {} dB, mean SE per geometry over xi = {} [{}], monotone in xi: "
                     "{}, in antennas: {}, {:.0f} s",
                     kTrendTrials, kTrendSnrDb, fmt::join(c.xi, "/"), listing, xi_monotone,
                     antenna_monotone, seconds_since(t0)));
  return r;
}

void upper_bound(const std::vector<std::pair<std::string, ExperimentResult>>& runs) {
  int violations = 0, hybrid = 0;
  double worst = -1e300;
  std::string names;
  for (const auto& [name, r] : runs) {
    violations += bound_violations(r, hybrid, worst);
    names += (names.empty() ? "" : ", ") + name;
  }
  report(8, "upper bound", violations == 0,
         fmt::format("{} hybrid records ({}), {} above fully digital by more than {:.0e}, largest "
                     "hybrid - digital gap {:+.3e}",
                     hybrid, names, violations, kBoundSlack, worst));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void cli_determinism() {
  const fs::path work = fs::temp_directory_path() / "dpa_acceptance_cli";
  fs::remove_all(work);
  fs::create_directories(work);
  int compared = 0, identical = 0;
  for (const char* name : {"fig3a", "fig3b", "fig3c"}) {
    SystemConfig c = load_checked_in(name);
    c.trials = 3;
    c.subcarriers = 8;
    c.snr_grid_db = {-5.0, 5.0};
    const fs::path cfg = work / (std::string(name) + ".cfg");
    std::ofstream(cfg) << to_text(c);
    const char* scenario = name == std::string("fig3a")   ? "snr_sweep"
                           : name == std::string("fig3b") ? "bits_sweep"
                                                          : "csi_sweep";
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = work / fmt::format("{}_{}", name, rep);
      const std::string cmd = fmt::format("{} --config {} --scenario {} --seed 7 --out {} > {} 2>&1",
                                          DPA_CLI_PATH, cfg.string(), scenario, out.string(),
                                          (work / "log.txt").string());
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) continue;
      const std::string csv = slurp(out / "results.csv");
      if (rep == 0) {
        first = csv;
      } else {
        ++compared;
        identical += !csv.empty() && csv == first;
      }
    }
  }
  report(9, "CLI determinism", compared == 3 && identical == 3,
         fmt::format("{} / 3 scenarios produced byte-identical results.csv on repeat", identical));
}

void complexity() {
  ComplexityProbeOptions opt;
  opt.grid = {{2, 2}, {4, 2}, {8, 2}, {16, 2}};
  opt.repetitions = 7;
  std::vector<double> x, y;
  std::string listing;
  for (const auto& row : complexity_probe(opt)) {
    x.push_back(row.subarrays);
    y.push_back(row.seconds_per_iteration);
    listing += fmt::format("{}M_t={} {:.3g} s", listing.empty() ? "" : ", ", row.subarrays,
                           row.seconds_per_iteration);
  }
  const double slope = loglog_slope(x, y);
  report(10, "complexity probe", slope >= kSlopeLow && slope <= kSlopeHigh,
         fmt::format("per-iteration cost of the update as written, N_s = 2: [{}], log-log slope "
                     "{:.3f} (in [{}, {}])",
                     listing, slope, kSlopeLow, kSlopeHigh));

  opt.recompute_linear_term = false;
  std::vector<double> y2;
  for (const auto& row : complexity_probe(opt)) y2.push_back(row.seconds_per_iteration);
  info(fmt::format("default solver (A^T b formed once per solve): slope {:.3f}",
                   loglog_slope(x, y2)));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  oracle_equivalence();
  structural_invariants();
  planted_recovery();
  monotone_descent();
  water_filling_oracle();
  ExperimentResult bits = bits_trend();
  ExperimentResult csi = csi_trend();

  SystemConfig a = load_checked_in("fig3a");
  const ExperimentResult snr = run_experiment(a, Scenario::kSnrSweep);
  upper_bound({{fmt::format("fig3a snr_sweep {} trials x {} SNRs", a.trials, a.snr_grid_db.size()),
                snr},
               {"fig3b bits_sweep at 0 dB", bits},
               {"fig3c csi_sweep at 0 dB", csi}});
  cli_determinism();
  complexity();
  fmt::print("{} of 10 criteria passed, {:.0f} s total\n", 10 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
