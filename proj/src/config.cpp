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

#include "carmtol/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"
#include "text_position.hpp"

namespace carmtol {

using nlohmann::json;

namespace {

// Walks a parsed document and records every problem with its dotted path
// instead of stopping at the first.
class StrictReader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  // Returns the object at obj[key] or nullptr; reports unknown keys within it.
  const json* section(const json& obj, const std::string& path, std::string_view key,
                      std::initializer_list<std::string_view> allowed) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return nullptr;
    const std::string p = join(path, key);
    if (!it->is_object()) {
      fail(p, "expected an object");
      return nullptr;
    }
    check_keys(*it, p, allowed);
    return &*it;
  }

  void check_keys(const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, v] : obj.items()) {
      bool known = false;
      for (auto a : allowed) known = known || a == k;
      if (!known) fail(join(path, k), "unknown key");
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, double& out) {
    if (const json* v = find(obj, key)) {
      if (v->is_number()) out = v->get<double>();
      else fail(join(path, key), "expected a number");
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, int& out) {
    if (const json* v = find(obj, key)) {
      if (v->is_number_integer() && v->get<long long>() >= INT32_MIN && v->get<long long>() <= INT32_MAX) {
        out = v->get<int>();
      } else {
        fail(join(path, key), "expected an integer");
      }
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, std::uint64_t& out) {
    if (const json* v = find(obj, key)) {
      if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
      else fail(join(path, key), "expected a non-negative integer");
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, bool& out) {
    if (const json* v = find(obj, key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else fail(join(path, key), "expected true or false");
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, std::string& out) {
    if (const json* v = find(obj, key)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(join(path, key), "expected a string");
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, std::vector<double>& out) {
    if (const json* v = find(obj, key)) {
      if (!v->is_array()) {
        fail(join(path, key), "expected an array of numbers");
        return;
      }
      std::vector<double> values;
      for (const auto& e : *v) {
        if (!e.is_number()) {
          fail(join(path, key), "expected an array of numbers");
          return;
        }
        values.push_back(e.get<double>());
      }
      out = std::move(values);
    }
  }

  void read(const json* obj, const std::string& path, std::string_view key, Vector3d& out) {
    if (const json* v = find(obj, key)) {
      if (!v->is_array() || v->size() != 3 || !(*v)[0].is_number() || !(*v)[1].is_number() ||
          !(*v)[2].is_number()) {
        fail(join(path, key), "expected an array of 3 numbers");
        return;
      }
      out = Vector3d((*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>());
    }
  }

  // Enumerated string field.
  template <typename T>
  void read_enum(const json* obj, const std::string& path, std::string_view key, T& out,
                 const std::function<std::optional<T>(std::string_view)>& parse,
                 std::string_view choices) {
    std::string text;
    const std::size_t before = errors.size();
    read(obj, path, key, text);
    if (errors.size() != before || find(obj, key) == nullptr) return;
    if (auto parsed = parse(text)) out = *parsed;
    else fail(join(path, key), "expected one of " + std::string(choices));
  }

 private:
  static const json* find(const json* obj, std::string_view key) {
    if (obj == nullptr) return nullptr;
    const auto it = obj->find(std::string(key));
    return it == obj->end() ? nullptr : &*it;
  }
};

std::optional<PointSource> parse_point_source(std::string_view s) {
  if (s == "volume") return PointSource::volume;
  if (s == "phantom") return PointSource::phantom;
  return std::nullopt;
}

std::optional<LandmarkPolicy> parse_landmarks(std::string_view s) {
  if (s == "shared") return LandmarkPolicy::shared;
  if (s == "disjoint") return LandmarkPolicy::disjoint;
  return std::nullopt;
}

const char* to_string(PointSource s) { return s == PointSource::volume ? "volume" : "phantom"; }
const char* to_string(LandmarkPolicy p) { return p == LandmarkPolicy::shared ? "shared" : "disjoint"; }

void validate(const ExperimentConfig& c, StrictReader& r) {
  const auto& rig = c.rig;
  if (!(rig.focal_ap > 0.0)) r.fail("rig.focal_ap", "must be positive");
  if (!(rig.focal_lat > 0.0)) r.fail("rig.focal_lat", "must be positive");
  if (rig.image_width <= 0) r.fail("rig.image_width", "must be positive");
  if (rig.image_height <= 0) r.fail("rig.image_height", "must be positive");
  if (!(rig.pixel_spacing > 0.0)) r.fail("rig.pixel_spacing", "must be positive");
  if (!(rig.distance_ap > 0.0)) r.fail("rig.distance_ap", "must be positive");
  if (!(rig.distance_lat > 0.0)) r.fail("rig.distance_lat", "must be positive");
  if (!(rig.view_angle_deg > 10.0 && rig.view_angle_deg < 170.0)) {
    r.fail("rig.view_angle_deg", "must lie strictly between 10 and 170");
  }

  if (!c.volume.center.allFinite()) r.fail("volume.center", "must be finite");
  if (!(c.volume.half_extent.array() > 0.0).all() || !c.volume.half_extent.allFinite()) {
    r.fail("volume.half_extent", "every component must be positive");
  }
  if (!(c.filters.edge_margin >= 0.0)) r.fail("filters.edge_margin", "must be non-negative");
  if (!(c.filters.min_disparity >= 0.0)) r.fail("filters.min_disparity", "must be non-negative");

  const auto& p = c.perturbation;
  if (p.trials_per_cell < 1) r.fail("perturbation.trials_per_cell", "must be at least 1");
  for (double pp : p.pp_levels) {
    if (!(pp >= 0.0)) {
      r.fail("perturbation.pp_levels", "levels must be non-negative");
      break;
    }
  }

  if (c.phantom) {
    const auto& ph = *c.phantom;
    if (ph.rows < 1) r.fail("phantom.rows", "must be at least 1");
    if (ph.cols < 1) r.fail("phantom.cols", "must be at least 1");
    if (ph.planes < 1) r.fail("phantom.planes", "must be at least 1");
    if (!(ph.pitch > 0.0)) r.fail("phantom.pitch", "must be positive");
    if (ph.planes > 1 && !(ph.plane_separation > 0.0)) r.fail("phantom.plane_separation", "must be positive");
  }

  const auto& e = c.evaluation;
  if (e.sample_count < 1) r.fail("evaluation.sample_count", "must be at least 1");
  if (e.landmark_sample_count < 1) r.fail("evaluation.landmark_sample_count", "must be at least 1");
  if (!(e.pixel_noise >= 0.0)) r.fail("evaluation.pixel_noise", "must be non-negative");
  if (e.points == PointSource::phantom && !c.phantom) {
    r.fail("evaluation.points", "\"phantom\" requires a phantom section");
  }
  if (!(c.refinement.tolerance > 0.0)) r.fail("refinement.tolerance", "must be positive");
  if (c.refinement.max_iterations < 0) r.fail("refinement.max_iterations", "must be non-negative");

  // Cross-references only once every field is individually valid.
  if (!r.errors.empty()) return;
  try {
    const auto built = build_default_rig(c.rig);
    if (e.points == PointSource::phantom) phantom_points(*c.phantom, built, c.filters);
  } catch (const LayoutNotVisible& ex) {
    r.fail("phantom", ex.what());
  } catch (const Error& ex) {
    r.fail("rig", ex.what());
  }
}

json vec3(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["rig"] = {{"focal_ap", c.rig.focal_ap},         {"focal_lat", c.rig.focal_lat},
              {"image_width", c.rig.image_width},   {"image_height", c.rig.image_height},
              {"pixel_spacing", c.rig.pixel_spacing}, {"distance_ap", c.rig.distance_ap},
              {"distance_lat", c.rig.distance_lat}, {"view_angle_deg", c.rig.view_angle_deg}};
  j["volume"] = {{"center", vec3(c.volume.center)}, {"half_extent", vec3(c.volume.half_extent)}};
  j["filters"] = {{"edge_margin", c.filters.edge_margin}, {"min_disparity", c.filters.min_disparity}};
  j["perturbation"] = {{"mode", std::string(to_string(c.perturbation.mode))},
                       {"focal_levels", c.perturbation.focal_levels},
                       {"pp_levels", c.perturbation.pp_levels},
                       {"trials_per_cell", c.perturbation.trials_per_cell}};
  if (c.phantom) {
    const auto& ph = *c.phantom;
    j["phantom"] = {{"rows", ph.rows},   {"cols", ph.cols},
                    {"planes", ph.planes}, {"pitch", ph.pitch},
                    {"plane_separation", ph.plane_separation}, {"yaw_deg", ph.yaw_deg},
                    {"center", vec3(ph.center)}};
  }
  const auto& e = c.evaluation;
  j["evaluation"] = {{"points", to_string(e.points)},
                     {"sample_count", e.sample_count},
                     {"landmarks", to_string(e.landmarks)},
                     {"landmark_sample_count", e.landmark_sample_count},
                     {"resample_per_trial", e.resample_per_trial},
                     {"pixel_noise", e.pixel_noise}};
  j["refinement"] = {{"tolerance", c.refinement.tolerance},
                     {"max_iterations", c.refinement.max_iterations}};
  j["output"] = {{"csv", c.output.csv}, {"json", c.output.json}};
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::simulation_default() {
  ExperimentConfig c;
  c.name = "sim_default";
  c.seed = 1;
  c.rig = RigConfig::simulation();
  c.perturbation = PerturbationSpec::simulation();
  c.output = {"sim_default.csv", "sim_default.json"};
  return c;
}

ExperimentConfig ExperimentConfig::phantom_default() {
  ExperimentConfig c;
  c.name = "phantom_default";
  c.seed = 1;
  c.rig = RigConfig::phantom();
  c.perturbation = PerturbationSpec::phantom();
  c.phantom = PhantomLayout{};
  c.evaluation.points = PointSource::phantom;
  c.output = {"phantom_default.csv", "phantom_default.json"};
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& ex) {
    const auto [line, column] = detail::line_and_column(text, ex.byte);
    throw ParseError("config parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + ex.what(),
                     line, column);
  }
  if (!doc.is_object()) {
    throw ValidationError({"(root): expected an object"});
  }

  StrictReader r;
  r.check_keys(doc, "", {"schema_version", "name", "seed", "rig", "volume", "filters", "perturbation",
                         "phantom", "evaluation", "refinement", "output"});
  int version = 0;
  if (!doc.contains("schema_version")) r.fail("schema_version", "missing");
  r.read(&doc, "", "schema_version", version);
  if (doc.contains("schema_version") && version != kConfigSchemaVersion) {
    r.fail("schema_version", "unsupported version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }

  ExperimentConfig c;
  r.read(&doc, "", "name", c.name);
  if (!doc.contains("seed")) r.fail("seed", "missing");
  r.read(&doc, "", "seed", c.seed);

  if (const json* s = r.section(doc, "", "rig",
                                {"focal_ap", "focal_lat", "image_width", "image_height", "pixel_spacing",
                                 "distance_ap", "distance_lat", "view_angle_deg"})) {
    r.read(s, "rig", "focal_ap", c.rig.focal_ap);
    r.read(s, "rig", "focal_lat", c.rig.focal_lat);
    r.read(s, "rig", "image_width", c.rig.image_width);
    r.read(s, "rig", "image_height", c.rig.image_height);
    r.read(s, "rig", "pixel_spacing", c.rig.pixel_spacing);
    r.read(s, "rig", "distance_ap", c.rig.distance_ap);
    r.read(s, "rig", "distance_lat", c.rig.distance_lat);
    r.read(s, "rig", "view_angle_deg", c.rig.view_angle_deg);
  }
  if (const json* s = r.section(doc, "", "volume", {"center", "half_extent"})) {
    r.read(s, "volume", "center", c.volume.center);
    r.read(s, "volume", "half_extent", c.volume.half_extent);
  }
  if (const json* s = r.section(doc, "", "filters", {"edge_margin", "min_disparity"})) {
    r.read(s, "filters", "edge_margin", c.filters.edge_margin);
    r.read(s, "filters", "min_disparity", c.filters.min_disparity);
  }
  if (const json* s = r.section(doc, "", "perturbation",
                                {"mode", "focal_levels", "pp_levels", "trials_per_cell"})) {
    r.read_enum<PerturbationMode>(s, "perturbation", "mode", c.perturbation.mode,
                                  parse_perturbation_mode, "signed-level, uniform-scaled");
    r.read(s, "perturbation", "focal_levels", c.perturbation.focal_levels);
    r.read(s, "perturbation", "pp_levels", c.perturbation.pp_levels);
    r.read(s, "perturbation", "trials_per_cell", c.perturbation.trials_per_cell);
  }
  if (const json* s = r.section(doc, "", "phantom",
                                {"rows", "cols", "planes", "pitch", "plane_separation", "yaw_deg", "center"})) {
    PhantomLayout ph;
    r.read(s, "phantom", "rows", ph.rows);
    r.read(s, "phantom", "cols", ph.cols);
    r.read(s, "phantom", "planes", ph.planes);
    r.read(s, "phantom", "pitch", ph.pitch);
    r.read(s, "phantom", "plane_separation", ph.plane_separation);
    r.read(s, "phantom", "yaw_deg", ph.yaw_deg);
    r.read(s, "phantom", "center", ph.center);
    c.phantom = ph;
  }
  if (const json* s = r.section(doc, "", "evaluation",
                                {"points", "sample_count", "landmarks", "landmark_sample_count",
                                 "resample_per_trial", "pixel_noise"})) {
    auto& e = c.evaluation;
    r.read_enum<PointSource>(s, "evaluation", "points", e.points, parse_point_source, "volume, phantom");
    r.read(s, "evaluation", "sample_count", e.sample_count);
    r.read_enum<LandmarkPolicy>(s, "evaluation", "landmarks", e.landmarks, parse_landmarks,
                                "shared, disjoint");
    r.read(s, "evaluation", "landmark_sample_count", e.landmark_sample_count);
    r.read(s, "evaluation", "resample_per_trial", e.resample_per_trial);
    r.read(s, "evaluation", "pixel_noise", e.pixel_noise);
  }
  if (const json* s = r.section(doc, "", "refinement", {"tolerance", "max_iterations"})) {
    r.read(s, "refinement", "tolerance", c.refinement.tolerance);
    r.read(s, "refinement", "max_iterations", c.refinement.max_iterations);
  }
  if (const json* s = r.section(doc, "", "output", {"csv", "json"})) {
    r.read(s, "output", "csv", c.output.csv);
    r.read(s, "output", "json", c.output.json);
  }

  validate(c, r);
  if (!r.errors.empty()) throw ValidationError(std::move(r.errors));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::optional<ExperimentConfig> bundled_config(std::string_view name) {
  if (name == "sim_default") return ExperimentConfig::simulation_default();
  if (name == "phantom_default") return ExperimentConfig::phantom_default();
  return std::nullopt;
}

ExperimentConfig resolve_config(std::string_view arg) {
  const std::filesystem::path path{std::string(arg)};
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) return load_config(path);
  if (auto bundled = bundled_config(arg)) return *bundled;
  throw IoError("no config file or bundled config named '" + std::string(arg) + "'");
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_to_pretty_json(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_digest(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace carmtol
