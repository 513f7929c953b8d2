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

// dpa-precode: Monte Carlo spectral-efficiency runs of ADMM alternating-minimization
// hybrid precoding for distributed phased arrays.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dpa/channel.hpp"
#include "dpa/config.hpp"
#include "dpa/errors.hpp"
#include "dpa/evaluation.hpp"
#include "dpa/plot.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dpa::Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void dump_channels(const dpa::SystemConfig& config, dpa::Scenario scenario, const fs::path& dir) {
  const auto geometries = scenario == dpa::Scenario::kCsiSweep
                              ? config.geometries()
                              : std::vector<dpa::AntennaPair>{
                                    {config.antennas_per_subarray, config.rx_antennas}};
  const auto hash = dpa::config_hash(config);
  for (const auto& g : geometries) {
    const auto channels = dpa::generate_channel(config.channel_model(g), config.seed, 0, hash);
    const std::string name =
        geometries.size() == 1
            ? std::string("channels_trial0.txt")
            : fmt::format("channels_trial0_{}x{}.txt", g.antennas_per_subarray, g.rx_antennas);
    auto out = open_output(dir / name);
    dpa::write_channel_dump(out, channels);
  }
}

bool write_plot(const dpa::ExperimentResult& result, dpa::Scenario scenario,
                const fs::path& dir) {
  try {
    const fs::path path = dir / fmt::format("se_vs_snr_{}.svg", dpa::scenario_name(scenario));
    auto out = open_output(path);
    dpa::write_svg_plot(out, fmt::format("Average spectral efficiency ({})",
                                         dpa::scenario_name(scenario)),
                        "SNR (dB)", "Spectral efficiency (bits/s/Hz)",
                        dpa::se_vs_snr_series(result.summarize()));
    return static_cast<bool>(out);
  } catch (const std::exception& e) {
    std::cerr << "warning: plot not written: " << e.what() << '\n';
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid precoding experiments for wideband distributed phased arrays"};
  app.set_version_flag("--version", "dpa-precode 1.0");

  std::string config_path;
  std::string scenario_arg = "snr_sweep";
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool plot = false;
  bool dump = false;

  app.add_option("--config", config_path, "Configuration file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario_arg, "Experiment to run")
      ->check(CLI::IsMember({"snr_sweep", "bits_sweep", "csi_sweep"}));
  app.add_option("--seed", seed, "Master seed; overrides the config file");
  app.add_option("--out", out_dir, "Output directory; overrides out_dir from the config file");
  app.add_flag("--plot", plot, "Write an SVG plot of mean SE against SNR");
  app.add_flag("--dump-channels", dump, "Write the trial-0 channel matrices as text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  dpa::SystemConfig config;
  dpa::Scenario scenario{};
  try {
    config = dpa::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    dpa::validate(config);
    scenario = dpa::parse_scenario(scenario_arg);
  } catch (const dpa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    {
      auto out = open_output(dir / "config_resolved.cfg");
      out << dpa::to_text(config);
    }
    if (dump) dump_channels(config, scenario, dir);

    const dpa::ExperimentResult result = dpa::run_experiment(config, scenario);
    {
      auto out = open_output(dir / "results.csv");
      dpa::write_csv(out, result);
      if (!out) throw dpa::Error("failed while writing results.csv");
    }
    const auto summary = result.summarize();
    {
      auto out = open_output(dir / "summary.csv");
      dpa::write_summary_csv(out, summary);
    }
    if (plot) write_plot(result, scenario, dir);

    std::cout << fmt::format("{}: {} records -> {}\n", dpa::scenario_name(scenario),
                             result.records.size(), (dir / "results.csv").string());
    for (const auto& row : summary) {
      std::cout << fmt::format("  {:<28} snr={:>6.1f} dB  SE={:8.4f} +- {:.4f}\n", row.curve,
                               row.snr_db, row.mean, row.standard_error);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
