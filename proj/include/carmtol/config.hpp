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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "carmtol/geometry.hpp"
#include "carmtol/perturbation.hpp"
#include "carmtol/pnp.hpp"
#include "carmtol/sampling.hpp"

namespace carmtol {

inline constexpr int kConfigSchemaVersion = 1;

enum class PointSource { volume, phantom };
enum class LandmarkPolicy { shared, disjoint };

/// Which 3D points are reconstructed and which drive pose estimation.
struct EvaluationConfig {
  PointSource points = PointSource::volume;
  int sample_count = 500;  // volume samples drawn before filtering
  LandmarkPolicy landmarks = LandmarkPolicy::shared;
  int landmark_sample_count = 500;  // used when landmarks are disjoint
  bool resample_per_trial = false;
  double pixel_noise = 0.0;  // std dev of Gaussian detection noise, px
};

struct OutputConfig {
  std::string csv = "report.csv";
  std::string json = "report.json";
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  RigConfig rig;
  VolumeSpec volume;
  FilterSpec filters;
  PerturbationSpec perturbation = PerturbationSpec::simulation();
  std::optional<PhantomLayout> phantom;
  EvaluationConfig evaluation;
  RefineOptions refinement;
  OutputConfig output;

  static ExperimentConfig simulation_default();
  static ExperimentConfig phantom_default();
};

/// Parses and fully validates config text. Throws ParseError (with line and
/// column) on malformed JSON, otherwise ValidationError listing every
/// violation with its field path. Unknown keys are violations.
ExperimentConfig parse_config(std::string_view text);

/// Reads `path` and calls parse_config. Throws IoError if unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

/// `arg` as a file path if it exists, else as a bundled config name
/// ("sim_default", "phantom_default").
ExperimentConfig resolve_config(std::string_view arg);

std::optional<ExperimentConfig> bundled_config(std::string_view name);

/// Canonical compact JSON of the fully explicit config (sorted keys).
std::string config_to_json(const ExperimentConfig& config);
std::string config_to_pretty_json(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

}  // namespace carmtol
