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

#include <numbers>
#include <string>

#include "dpa/config.hpp"
#include "dpa/errors.hpp"

using namespace dpa;

namespace {

const char* kMinimal = R"(# four-subarray dimensions
M_t = 4
N_t_sub = 8
N_r = 8
K = 32
N_s = 2
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal file gets the documented defaults") {
  const SystemConfig c = parse_config(kMinimal);
  CHECK(c.subarrays == 4);
  CHECK(c.antennas_per_subarray == 8);
  CHECK(c.rx_antennas == 8);
  CHECK(c.subcarriers == 32);
  CHECK(c.streams == 2);
  CHECK(c.clusters == 5);
  CHECK(c.rays == 10);
  CHECK(c.angular_spread_deg == 10.0);
  CHECK(c.spacing_over_wavelength == 0.5);
  CHECK(c.power == 2.0);
  CHECK(c.rho == 1.0);
  CHECK(c.eps_p == 1e-6);
  CHECK(c.eps_d == 1e-6);
  CHECK(c.admm_max_iters == 10000);
  CHECK(c.outer_tol == 1e-4);
  CHECK(c.outer_max_iters == 50);
  CHECK(c.bits.size() == 1);
  CHECK(c.bits[0].is_infinite());
  CHECK(c.xi == std::vector<double>{1.0});
  CHECK(c.skip_no_fixed_point);
  CHECK(c.total_tx() == 32);
}

TEST_CASE("list and range syntax") {
  const SystemConfig c = parse_config(std::string(kMinimal) + R"(
snr_grid_db = -10:5:10
bits = 1, 2,inf
xi = 0.5, 1
antenna_grid = 4x8, 8x16
P = 3.5
quantize = after_convergence
x_update = verbatim
water_filling_noise = raw
skip_no_fixed_point = false
)");
  CHECK(c.snr_grid_db == std::vector<double>{-10, -5, 0, 5, 10});
  REQUIRE(c.bits.size() == 3);
  CHECK(c.bits[1].bits() == 2);
  CHECK(c.bits[2].is_infinite());
  CHECK(c.xi == std::vector<double>{0.5, 1.0});
  REQUIRE(c.antenna_grid.size() == 2);
  CHECK(c.antenna_grid[1] == AntennaPair{8, 16});
  CHECK(c.power == 3.5);
  CHECK(c.quantize == QuantizePlacement::kAfterConvergence);
  CHECK(c.x_update == XUpdateRule::kVerbatim);
  CHECK(c.water_filling_noise == WaterFillingNoise::kRaw);
  CHECK_FALSE(c.skip_no_fixed_point);
  CHECK_FALSE(c.altmin_options(PhaseResolution::infinite()).skip_without_fixed_point);
}

TEST_CASE("invalid files are rejected with a location") {
  CHECK(error_of("M_t = 2\nN_t_sub = 4\nN_r = 4\nK = 1\nN_s = 3\n")
            .find("streams exceed RF chains") != std::string::npos);
  const std::string dup = error_of(std::string(kMinimal) + "N_s = 1\n");
  CHECK(dup.find("line 7") != std::string::npos);
  CHECK(dup.find("duplicate key 'N_s'") != std::string::npos);
  CHECK(dup.find("line 6") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "colour = blue\n").find("line 7: unknown key 'colour'") !=
        std::string::npos);
  CHECK(error_of("M_t = 4\n").find("required") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "trials = two\n").find("line 7") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "xi = 1.5\n").find("xi") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "bits = 0\n").find("bits") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "rho = -1\n").find("rho") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "quantize = sometimes\n").find("every_iteration") !=
        std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "no equals sign\n").find("line 7") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/file.cfg"), ConfigError);
}

TEST_CASE("to_text round trip") {
  const std::string extras[] = {
      "",
      "snr_grid_db = -7.5, 0.1, 3\nbits = 1, 4, inf\nxi = 0.3, 0.9\n",
      "antenna_grid = 2x4, 4x8\nseed = 18446744073709551615\nrho = 0.7\neps_p = 1e-9\n",
      "P = 0.1\nd_e_over_lambda = 0.25\nangular_spread_deg = 7.3\nthreads = 2\n"
      "out_dir = results/run 1\n",
  };
  for (const auto& extra : extras) {
    const SystemConfig c = parse_config(std::string(kMinimal) + extra);
    const SystemConfig back = parse_config(to_text(c));
    CHECK(back == c);
    CHECK(to_text(back) == to_text(c));
    CHECK(config_hash(back) == config_hash(c));
  }
  const SystemConfig a = parse_config(kMinimal);
  const SystemConfig b = parse_config(std::string(kMinimal) + "seed = 2\n");
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("derived options") {
  const SystemConfig c = parse_config(std::string(kMinimal) + "antenna_grid = 4x6\n");
  const TargetOptions t = c.target_options(10.0);
  CHECK(t.streams == 2);
  CHECK(t.power == 2.0);
  CHECK(t.noise_variance == doctest::Approx(0.2).epsilon(1e-12));
  const ChannelModel m = c.channel_model({4, 6});
  CHECK(m.geometry.subarrays == 4);
  CHECK(m.geometry.antennas_per_subarray == 4);
  CHECK(m.geometry.rx_antennas == 6);
  CHECK(m.subcarriers == 32);
  CHECK(m.angular_spread == doctest::Approx(10.0 * std::numbers::pi / 180.0));
  CHECK(c.geometries() == std::vector<AntennaPair>{{4, 6}});
  CHECK(parse_config(kMinimal).geometries() == std::vector<AntennaPair>{{8, 8}});
}

TEST_CASE("checked-in configurations load") {
  for (const char* name : {"fig3a", "fig3b", "fig3c"}) {
    const SystemConfig c =
        load_config(std::string(DPA_SOURCE_DIR) + "/configs/" + name + ".cfg");
    CHECK(c.trials >= 100);
  }
  const SystemConfig b = load_config(std::string(DPA_SOURCE_DIR) + "/configs/fig3b.cfg");
  CHECK(b.bits.size() == 5);
  const SystemConfig c = load_config(std::string(DPA_SOURCE_DIR) + "/configs/fig3c.cfg");
  CHECK(c.xi == std::vector<double>{0.5, 0.7, 0.9, 1.0});
}
