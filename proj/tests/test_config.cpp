// Copyright 2026 The carmtol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carmtol/config.hpp"

using namespace carmtol;

#ifndef CARMTOL_SOURCE_DIR
#error "CARMTOL_SOURCE_DIR must point at the repository root"
#endif

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("bundled configs") {
  const auto sim = bundled_config("sim_default");
  REQUIRE(sim.has_value());
  CHECK(sim->rig.focal_ap == 4500.0);
  CHECK(sim->rig.focal_lat == 4550.0);
  CHECK(sim->perturbation.focal_levels.size() == 14);
  CHECK(resolve_config("sim_default").rig.focal_ap == 4500.0);

  const auto ph = bundled_config("phantom_default");
  REQUIRE(ph.has_value());
  CHECK(ph->rig.focal_ap == 4800.0);
  CHECK(ph->phantom.has_value());
  CHECK(ph->evaluation.points == PointSource::phantom);

  CHECK_FALSE(bundled_config("nope").has_value());
  CHECK_THROWS_AS(resolve_config("nope"), IoError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("shipped config files match the bundled defaults") {
  const std::filesystem::path dir = std::filesystem::path(CARMTOL_SOURCE_DIR) / "configs";
  for (const char* name : {"sim_default", "phantom_default"}) {
    const auto file = dir / (std::string(name) + ".json");
    const ExperimentConfig loaded = load_config(file);
    CHECK(config_to_json(loaded) == config_to_json(*bundled_config(name)));
    CHECK(config_digest(loaded) == config_digest(*bundled_config(name)));
    CHECK(read_file(file) == config_to_pretty_json(loaded));
  }
}

TEST_CASE("serialization round trip") {
  const ExperimentConfig c = ExperimentConfig::phantom_default();
  const ExperimentConfig back = parse_config(config_to_pretty_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_to_json(c) == config_to_json(c));
  CHECK(config_digest(c).size() == 16);
  CHECK(config_digest(c) != config_digest(ExperimentConfig::simulation_default()));
}

TEST_CASE("minimal config takes defaults") {
  const ExperimentConfig c = parse_config(R"({"schema_version": 1, "seed": 42})");
  CHECK(c.seed == 42);
  CHECK(c.rig.focal_ap == 4500.0);
  CHECK(c.perturbation.pp_levels.size() == 4);
}

TEST_CASE("semantic violations name their field") {
  const auto v = violations_of(R"({"schema_version": 1, "seed": 1, "rig": {"pixel_spacing": -0.21}})");
  REQUIRE(v.size() == 1);
  CHECK(v[0].rfind("rig.pixel_spacing", 0) == 0);

  const auto many = violations_of(
      R"({"schema_version": 1, "seed": 1, "rig": {"focal_ap": 0, "view_angle_deg": 0},
          "perturbation": {"pp_levels": [-1], "trials_per_cell": 0}, "evaluation": {"pixel_noise": -1}})");
  CHECK(mentions(many, "rig.focal_ap"));
  CHECK(mentions(many, "rig.view_angle_deg"));
  CHECK(mentions(many, "perturbation.pp_levels"));
  CHECK(mentions(many, "perturbation.trials_per_cell"));
  CHECK(mentions(many, "evaluation.pixel_noise"));
}

TEST_CASE("unknown keys are rejected") {
  const auto v = violations_of(R"({"schema_version": 1, "seed": 1, "rig": {"focal_lenght": 4500}})");
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "rig.focal_lenght: unknown key");
  CHECK(mentions(violations_of(R"({"schema_version": 1, "seed": 1, "extra": true})"), "unknown key"));
}

TEST_CASE("required and typed fields") {
  CHECK(mentions(violations_of(R"({"seed": 1})"), "schema_version"));
  CHECK(mentions(violations_of(R"({"schema_version": 2, "seed": 1})"), "schema_version"));
  CHECK(mentions(violations_of(R"({"schema_version": 1})"), "seed"));
  CHECK(mentions(violations_of(R"({"schema_version": 1, "seed": 1, "rig": {"focal_ap": "big"}})"), "rig.focal_ap"));
  CHECK(mentions(violations_of(R"({"schema_version": 1, "seed": 1, "perturbation": {"mode": "gauss"}})"),
                 "perturbation.mode"));
  CHECK(mentions(violations_of(R"({"schema_version": 1, "seed": 1, "evaluation": {"points": "phantom"}})"),
                 "phantom"));
}

TEST_CASE("phantom that does not fit the rig is a validation error") {
  ExperimentConfig c = ExperimentConfig::phantom_default();
  c.phantom->center = Eigen::Vector3d(500.0, 0.0, 0.0);
  CHECK(mentions(violations_of(config_to_json(c)), "phantom"));
}

TEST_CASE("malformed JSON reports line and column") {
  const std::string text = "{\n  \"schema_version\": 1,\n  \"seed\": ,\n}";
  try {
    parse_config(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 10);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
