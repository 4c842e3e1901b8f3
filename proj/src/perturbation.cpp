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

#include "carmtol/perturbation.hpp"

#include <cmath>
#include <numbers>

namespace carmtol {

std::string_view to_string(PerturbationMode mode) {
  switch (mode) {
    case PerturbationMode::signed_level:
      return "signed-level";
    case PerturbationMode::uniform_scaled:
      return "uniform-scaled";
  }
  return "unknown";
}

std::optional<PerturbationMode> parse_perturbation_mode(std::string_view text) {
  if (text == "signed-level") return PerturbationMode::signed_level;
  if (text == "uniform-scaled") return PerturbationMode::uniform_scaled;
  return std::nullopt;
}

namespace {

std::vector<double> symmetric_levels(int step, int max) {
  std::vector<double> levels;
  for (int v = -max; v <= max; v += step) {
    if (v != 0) levels.push_back(v);
  }
  return levels;
}

}  // namespace

PerturbationSpec PerturbationSpec::simulation() {
  return {symmetric_levels(100, 700), {20.0, 50.0, 100.0, 200.0}, PerturbationMode::signed_level, 100};
}

PerturbationSpec PerturbationSpec::phantom() {
  return {symmetric_levels(100, 500), {20.0, 50.0, 100.0, 200.0}, PerturbationMode::signed_level, 100};
}

void PerturbationSpec::validate() const {
  if (trials_per_cell < 1) throw InvalidPerturbation("trials_per_cell must be at least 1");
  for (double f : focal_levels) {
    if (!std::isfinite(f)) throw InvalidPerturbation("focal levels must be finite");
  }
  for (double p : pp_levels) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidPerturbation("principal-point levels must be finite and non-negative");
    }
  }
}

PerturbedIntrinsics perturb_intrinsics(const CameraIntrinsicsd& truth, double focal_level,
                                       double pp_level, PerturbationMode mode, Rng& rng) {
  if (!std::isfinite(focal_level) || !std::isfinite(pp_level) || pp_level < 0.0) {
    throw InvalidPerturbation("perturbation levels must be finite with pp_level >= 0");
  }
  const double u0 = rng.symmetric();
  const double u1 = rng.symmetric();
  const double u2 = rng.symmetric();

  double focal_delta = 0.0;
  Vector2d pp_delta;
  switch (mode) {
    case PerturbationMode::signed_level: {
      focal_delta = focal_level;
      const double angle = std::numbers::pi * u1;
      pp_delta = pp_level * Vector2d(std::cos(angle), std::sin(angle));
      break;
    }
    case PerturbationMode::uniform_scaled:
      focal_delta = std::abs(focal_level) * u0;
      pp_delta = pp_level * Vector2d(u1, u2);
      break;
  }

  const double fx = truth.fx() + focal_delta;
  const double fy = truth.fy() + focal_delta;
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidPerturbation("perturbed focal length is not positive");
  }
  return {CameraIntrinsicsd(fx, fy, truth.cx() + pp_delta.x(), truth.cy() + pp_delta.y(), truth.skew()),
          focal_delta, pp_delta};
}

std::vector<GridCell> grid(const PerturbationSpec& spec) {
  std::vector<GridCell> cells;
  cells.reserve(spec.focal_levels.size() * spec.pp_levels.size());
  for (double pp : spec.pp_levels) {
    for (double f : spec.focal_levels) cells.push_back({f, pp});
  }
  return cells;
}

}  // namespace carmtol
