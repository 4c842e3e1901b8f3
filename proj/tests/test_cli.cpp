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

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "carmtol/cli.hpp"
#include "carmtol/config.hpp"
#include "carmtol/report.hpp"

using namespace carmtol;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "carmtol");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

double field(const std::string& text, const std::string& name) {
  std::smatch m;
  const std::regex re(name + ": ([-+0-9.eE]+)");
  REQUIRE(std::regex_search(text, m, re));
  return std::stod(m[1]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the test inside a fresh temporary working directory.
struct ScratchDir {
  fs::path old = fs::current_path();
  fs::path dir;
  explicit ScratchDir(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::current_path(dir);
  }
  ~ScratchDir() {
    fs::current_path(old);
    fs::remove_all(dir);
  }
};

}  // namespace

TEST_CASE("simulate writes both reports") {
  ScratchDir scratch("carmtol_cli_simulate");
  const Run r = cli({"simulate", "sim_default"});
  CHECK(r.code == kExitOk);
  REQUIRE(fs::exists("sim_default.csv"));
  REQUIRE(fs::exists("sim_default.json"));
  const std::string csv = slurp("sim_default.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 57);
  CHECK(parse_report_json(slurp("sim_default.json")).config_digest ==
        config_digest(*bundled_config("sim_default")));

  const Run fig = cli({"figure", "sim_default.csv", "--pp", "200"});
  CHECK(fig.code == kExitOk);
  CHECK(fig.out.rfind("x,y,err\n", 0) == 0);
  CHECK(std::count(fig.out.begin(), fig.out.end(), '\n') == 15);

  const Run lat = cli({"figure", "sim_default.csv", "--pp", "20", "--metric", "reproj_lat"});
  CHECK(lat.code == kExitOk);

  const Run missing = cli({"figure", "sim_default.csv", "--pp", "999"});
  CHECK(missing.code == kExitValidation);
  CHECK(missing.err.find("no such pp level") != std::string::npos);
}

TEST_CASE("trial at zero perturbation") {
  const Run r = cli({"trial", "sim_default", "--focal", "0", "--pp", "0", "--seed", "1"});
  CHECK(r.code == kExitOk);
  CHECK(field(r.out, "recon_rmse_mm") < 1e-6);
  CHECK(field(r.out, "reproj_ap_px") < 1e-6);
  CHECK(field(r.out, "reproj_lat_px") < 1e-6);
}

TEST_CASE("trial breakdown at a large perturbation") {
  const Run r = cli({"trial", "sim_default", "--focal", "700", "--pp", "200", "--seed", "4"});
  CHECK(r.code == kExitOk);
  CHECK(field(r.out, "recon_rmse_mm") < 0.5);
  CHECK(r.out.find("focal delta 700.000 px (147.000 mm)") != std::string::npos);
  const Run again = cli({"trial", "sim_default", "--focal", "700", "--pp", "200", "--seed", "4"});
  CHECK(again.out == r.out);
}

TEST_CASE("sample emits the filtered points") {
  const Run r = cli({"sample", "sim_default"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.rfind("index,x_mm,y_mm,z_mm,ap_u_px,ap_v_px,lat_u_px,lat_v_px,edge_score_px,disparity_px\n", 0) == 0);
  const auto rows = std::count(r.out.begin(), r.out.end(), '\n') - 1;
  CHECK(rows >= 40);
  CHECK(rows <= 120);
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == kExitValidation);
  CHECK(cli({"bogus"}).code == kExitValidation);
  const Run usage = cli({"trial", "sim_default"});
  CHECK(usage.code == kExitValidation);
  CHECK(usage.err.find("--focal") != std::string::npos);

  CHECK(cli({"trial", "sim_default", "--focal", "0", "--pp", "-5", "--seed", "1"}).code == kExitValidation);
  CHECK(cli({"simulate", "no_such_config"}).code == kExitRuntime);
  CHECK(cli({"figure", "/nonexistent/report.csv", "--pp", "20"}).code == kExitRuntime);

  ScratchDir scratch("carmtol_cli_exit");
  std::ofstream("bad.json") << R"({"schema_version": 1, "seed": 1, "rig": {"pixel_spacing": -1}})";
  const Run bad = cli({"simulate", "bad.json"});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("rig.pixel_spacing") != std::string::npos);
}
