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

#include "dpa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dpa/errors.hpp"

namespace dpa {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    parts.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

[[noreturn]] void fail(std::string_view key, const std::string& what) {
  throw ConfigError(fmt::format("{}: {}", key, what));
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    fail(key, fmt::format("'{}' is not a finite number", v));
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    fail(key, fmt::format("'{}' is not an integer", v));
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<double> parse_grid(std::string_view key, std::string_view v) {
  if (v.find(':') == std::string_view::npos) return parse_double_list(key, v);
  const auto parts = split(v, ':');
  if (parts.size() != 3) fail(key, "range must be start:step:stop");
  const double start = parse_double(key, parts[0]);
  const double step = parse_double(key, parts[1]);
  const double stop = parse_double(key, parts[2]);
  if (!(step > 0.0) || stop < start) fail(key, "range needs step > 0 and stop >= start");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

PhaseResolution parse_resolution(std::string_view key, std::string_view v) {
  if (v == "inf" || v == "infinite") return PhaseResolution::infinite();
  const int bits = parse_int<int>(key, v);
  if (bits < 1 || bits > 30) fail(key, "bits must be 1..30 or inf");
  return PhaseResolution::from_bits(bits);
}

AntennaPair parse_antenna_pair(std::string_view key, std::string_view v) {
  const auto parts = split(v, 'x');
  if (parts.size() != 2) fail(key, fmt::format("'{}' is not of the form N_t_subxN_r", v));
  return {parse_int<int>(key, parts[0]), parse_int<int>(key, parts[1])};
}

template <typename Enum>
Enum parse_enum(std::string_view key, std::string_view v,
                std::initializer_list<std::pair<std::string_view, Enum>> names) {
  for (const auto& [name, value] : names) {
    if (v == name) return value;
  }
  std::vector<std::string_view> allowed;
  for (const auto& n : names) allowed.push_back(n.first);
  fail(key, fmt::format("'{}' is not one of {}", v, fmt::join(allowed, ", ")));
}

const char* name_of(WaterFillingNoise n) {
  return n == WaterFillingNoise::kStreamScaled ? "stream_scaled" : "raw";
}
const char* name_of(XUpdateRule r) {
  return r == XUpdateRule::kScaledDual ? "scaled_dual" : "verbatim";
}
const char* name_of(QuantizePlacement q) {
  return q == QuantizePlacement::kEveryIteration ? "every_iteration" : "after_convergence";
}

using Setter = std::function<void(SystemConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"M_t", [](auto& c, auto k, auto v) { c.subarrays = parse_int<int>(k, v); }},
      {"N_t_sub", [](auto& c, auto k, auto v) { c.antennas_per_subarray = parse_int<int>(k, v); }},
      {"N_r", [](auto& c, auto k, auto v) { c.rx_antennas = parse_int<int>(k, v); }},
      {"N_s", [](auto& c, auto k, auto v) { c.streams = parse_int<int>(k, v); }},
      {"K", [](auto& c, auto k, auto v) { c.subcarriers = parse_int<int>(k, v); }},
      {"N_cl", [](auto& c, auto k, auto v) { c.clusters = parse_int<int>(k, v); }},
      {"N_ray", [](auto& c, auto k, auto v) { c.rays = parse_int<int>(k, v); }},
      {"angular_spread_deg",
       [](auto& c, auto k, auto v) { c.angular_spread_deg = parse_double(k, v); }},
      {"d_e_over_lambda",
       [](auto& c, auto k, auto v) { c.spacing_over_wavelength = parse_double(k, v); }},
      {"P", [](auto& c, auto k, auto v) { c.power = parse_double(k, v); }},
      {"snr_grid_db", [](auto& c, auto k, auto v) { c.snr_grid_db = parse_grid(k, v); }},
      {"trials", [](auto& c, auto k, auto v) { c.trials = parse_int<int>(k, v); }},
      {"bits",
       [](auto& c, auto k, auto v) {
         c.bits.clear();
         for (auto item : split(v, ',')) c.bits.push_back(parse_resolution(k, item));
       }},
      {"xi", [](auto& c, auto k, auto v) { c.xi = parse_double_list(k, v); }},
      {"antenna_grid",
       [](auto& c, auto k, auto v) {
         c.antenna_grid.clear();
         if (v.empty()) return;
         for (auto item : split(v, ',')) c.antenna_grid.push_back(parse_antenna_pair(k, item));
       }},
      {"rho", [](auto& c, auto k, auto v) { c.rho = parse_double(k, v); }},
      {"eps_p", [](auto& c, auto k, auto v) { c.eps_p = parse_double(k, v); }},
      {"eps_d", [](auto& c, auto k, auto v) { c.eps_d = parse_double(k, v); }},
      {"admm_max_iters", [](auto& c, auto k, auto v) { c.admm_max_iters = parse_int<int>(k, v); }},
      {"outer_tol", [](auto& c, auto k, auto v) { c.outer_tol = parse_double(k, v); }},
      {"outer_max_iters",
       [](auto& c, auto k, auto v) { c.outer_max_iters = parse_int<int>(k, v); }},
      {"seed", [](auto& c, auto k, auto v) { c.seed = parse_int<std::uint64_t>(k, v); }},
      {"out_dir", [](auto& c, auto, auto v) { c.out_dir = std::string(v); }},
      {"water_filling_noise",
       [](auto& c, auto k, auto v) {
         c.water_filling_noise = parse_enum<WaterFillingNoise>(
             k, v, {{"stream_scaled", WaterFillingNoise::kStreamScaled},
                    {"raw", WaterFillingNoise::kRaw}});
       }},
      {"x_update",
       [](auto& c, auto k, auto v) {
         c.x_update = parse_enum<XUpdateRule>(
             k, v, {{"scaled_dual", XUpdateRule::kScaledDual}, {"verbatim", XUpdateRule::kVerbatim}});
       }},
      {"quantize",
       [](auto& c, auto k, auto v) {
         c.quantize = parse_enum<QuantizePlacement>(
             k, v, {{"every_iteration", QuantizePlacement::kEveryIteration},
                    {"after_convergence", QuantizePlacement::kAfterConvergence}});
       }},
      {"skip_no_fixed_point",
       [](auto& c, auto k, auto v) {
         c.skip_no_fixed_point = parse_enum<bool>(k, v, {{"true", true}, {"false", false}});
       }},
      {"threads", [](auto& c, auto k, auto v) { c.threads = parse_int<int>(k, v); }},
  };
  return table;
}

constexpr std::string_view kRequired[] = {"M_t", "N_t_sub", "N_r", "N_s", "K"};

void check_geometry(std::string_view key, const SystemConfig& c, int per_subarray, int rx) {
  if (per_subarray < 1) fail(key, "antennas per subarray must be positive");
  if (rx < 1) fail(key, "receive antennas must be positive");
  if (c.streams > rx) fail(key, fmt::format("streams exceed receive antennas (N_s={} > N_r={})",
                                            c.streams, rx));
}

}  // namespace

std::string format_resolution(PhaseResolution r) {
  return r.is_infinite() ? "inf" : std::to_string(r.bits());
}

void validate(const SystemConfig& c) {
  if (c.subarrays < 1) fail("M_t", "must be positive");
  if (c.streams < 1) fail("N_s", "must be positive");
  if (c.streams > c.subarrays) {
    fail("N_s", fmt::format("streams exceed RF chains (N_s={} > M_t={})", c.streams, c.subarrays));
  }
  if (c.antennas_per_subarray < 1) fail("N_t_sub", "must be positive");
  if (c.rx_antennas < 1) fail("N_r", "must be positive");
  if (c.streams > c.rx_antennas) {
    fail("N_s", fmt::format("streams exceed receive antennas (N_s={} > N_r={})", c.streams,
                            c.rx_antennas));
  }
  if (c.subcarriers < 1) fail("K", "must be at least 1");
  if (c.clusters < 1) fail("N_cl", "must be at least 1");
  if (c.rays < 1) fail("N_ray", "must be at least 1");
  if (!(c.angular_spread_deg > 0.0)) fail("angular_spread_deg", "must be positive");
  if (!(c.spacing_over_wavelength > 0.0)) fail("d_e_over_lambda", "must be positive");
  if (!(c.power > 0.0)) fail("P", "must be positive");
  if (c.snr_grid_db.empty()) fail("snr_grid_db", "must list at least one SNR");
  if (c.trials < 1) fail("trials", "must be at least 1");
  if (c.bits.empty()) fail("bits", "must list at least one resolution");
  if (c.xi.empty()) fail("xi", "must list at least one accuracy");
  for (double x : c.xi) {
    if (!(x >= 0.0 && x <= 1.0)) fail("xi", fmt::format("{} outside [0, 1]", x));
  }
  for (const auto& g : c.antenna_grid) {
    check_geometry("antenna_grid", c, g.antennas_per_subarray, g.rx_antennas);
  }
  if (!(c.rho > 0.0)) fail("rho", "must be positive");
  if (!(c.eps_p > 0.0)) fail("eps_p", "must be positive");
  if (!(c.eps_d > 0.0)) fail("eps_d", "must be positive");
  if (c.admm_max_iters < 1) fail("admm_max_iters", "must be positive");
  if (!(c.outer_tol > 0.0)) fail("outer_tol", "must be positive");
  if (c.outer_max_iters < 1) fail("outer_max_iters", "must be positive");
  if (c.out_dir.empty()) fail("out_dir", "must not be empty");
  if (c.threads < 0) fail("threads", "must be >= 0");
}

SystemConfig parse_config(std::string_view text) {
  SystemConfig config;
  std::map<std::string, int, std::less<>> seen;  // key -> line
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto setter = setters().find(key);
    if (setter == setters().end()) {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(fmt::format("line {}: duplicate key '{}' (first set on line {})", line_no,
                                    key, prev->second));
    }
    seen.emplace(std::string(key), line_no);
    try {
      setter->second(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  for (auto key : kRequired) {
    if (!seen.contains(key)) fail(key, "required key is missing");
  }
  if (!seen.contains("P")) config.power = static_cast<double>(config.streams);
  validate(config);
  return config;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_text(const SystemConfig& c) {
  std::vector<std::string> bits;
  for (const auto& b : c.bits) bits.push_back(format_resolution(b));
  std::vector<std::string> grid;
  for (const auto& g : c.antenna_grid) {
    grid.push_back(fmt::format("{}x{}", g.antennas_per_subarray, g.rx_antennas));
  }
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  // `{}` prints doubles in shortest round-trip form
  line("M_t", c.subarrays);
  line("N_t_sub", c.antennas_per_subarray);
  line("N_r", c.rx_antennas);
  line("N_s", c.streams);
  line("K", c.subcarriers);
  line("N_cl", c.clusters);
  line("N_ray", c.rays);
  line("angular_spread_deg", c.angular_spread_deg);
  line("d_e_over_lambda", c.spacing_over_wavelength);
  line("P", c.power);
  line("snr_grid_db", fmt::format("{}", fmt::join(c.snr_grid_db, ", ")));
  line("trials", c.trials);
  line("bits", fmt::format("{}", fmt::join(bits, ", ")));
  line("xi", fmt::format("{}", fmt::join(c.xi, ", ")));
  line("antenna_grid", fmt::format("{}", fmt::join(grid, ", ")));
  line("rho", c.rho);
  line("eps_p", c.eps_p);
  line("eps_d", c.eps_d);
  line("admm_max_iters", c.admm_max_iters);
  line("outer_tol", c.outer_tol);
  line("outer_max_iters", c.outer_max_iters);
  line("seed", c.seed);
  line("out_dir", c.out_dir);
  line("water_filling_noise", name_of(c.water_filling_noise));
  line("x_update", name_of(c.x_update));
  line("quantize", name_of(c.quantize));
  line("skip_no_fixed_point", c.skip_no_fixed_point ? "true" : "false");
  line("threads", c.threads);
  return out;
}

std::uint64_t config_hash(const SystemConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<AntennaPair> SystemConfig::geometries() const {
  if (antenna_grid.empty()) return {{antennas_per_subarray, rx_antennas}};
  return antenna_grid;
}

ChannelModel SystemConfig::channel_model(AntennaPair geometry) const {
  ChannelModel m;
  m.geometry.subarrays = subarrays;
  m.geometry.antennas_per_subarray = geometry.antennas_per_subarray;
  m.geometry.rx_antennas = geometry.rx_antennas;
  m.geometry.spacing_over_wavelength = spacing_over_wavelength;
  m.subcarriers = subcarriers;
  m.clusters = clusters;
  m.rays = rays;
  m.angular_spread = angular_spread_deg * std::numbers::pi / 180.0;
  return m;
}

AdmmOptions SystemConfig::admm_options() const {
  AdmmOptions o;
  o.rho = rho;
  o.eps_primal = eps_p;
  o.eps_dual = eps_d;
  o.max_iters = admm_max_iters;
  o.rule = x_update;
  return o;
}

AltMinOptions SystemConfig::altmin_options(PhaseResolution resolution) const {
  AltMinOptions o;
  o.admm = admm_options();
  o.resolution = resolution;
  o.placement = quantize;
  o.outer_tol = outer_tol;
  o.outer_max_iters = outer_max_iters;
  o.skip_without_fixed_point = skip_no_fixed_point;
  return o;
}

TargetOptions SystemConfig::target_options(double snr_db) const {
  TargetOptions t;
  t.streams = streams;
  t.power = power;
  // SNR = P / sigma_z^2
  t.noise_variance = power / std::pow(10.0, snr_db / 10.0);
  t.noise = water_filling_noise;
  return t;
}

}  // namespace dpa
