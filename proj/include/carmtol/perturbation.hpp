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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carmtol/geometry.hpp"
#include "carmtol/rng.hpp"

namespace carmtol {

// signed_level:   focal shifted by exactly the (signed) level; principal
//                 point moved by exactly pp_level in a uniformly random direction.
// uniform_scaled: focal shifted by |level| * u, each principal-point axis by
//                 pp_level * u', with u, u' ~ U[-1, 1] drawn independently.
enum class PerturbationMode { signed_level, uniform_scaled };

std::string_view to_string(PerturbationMode mode);
std::optional<PerturbationMode> parse_perturbation_mode(std::string_view text);

struct PerturbationSpec {
  std::vector<double> focal_levels;  // px
  std::vector<double> pp_levels;     // px, non-negative
  PerturbationMode mode = PerturbationMode::signed_level;
  int trials_per_cell = 100;

  /// ±100 … ±700 px focal, {20, 50, 100, 200} px principal point.
  static PerturbationSpec simulation();
  /// ±100 … ±500 px focal, same principal-point levels.
  static PerturbationSpec phantom();

  /// Throws InvalidPerturbation.
  void validate() const;
};

struct PerturbedIntrinsics {
  CameraIntrinsicsd intrinsics;
  double focal_delta;  // applied to fx and fy alike, px
  Vector2d pp_delta;   // px
};

/// Draws one perturbation of `truth`. Always consumes three uniforms from
/// `rng` so streams stay aligned across modes and levels. Throws
/// InvalidPerturbation for a negative pp level or a non-positive result focal.
PerturbedIntrinsics perturb_intrinsics(const CameraIntrinsicsd& truth, double focal_level,
                                       double pp_level, PerturbationMode mode, Rng& rng);

struct GridCell {
  double focal_level;
  double pp_level;

  bool operator==(const GridCell&) const = default;
};

/// focal_levels x pp_levels with pp outer, focal inner.
std::vector<GridCell> grid(const PerturbationSpec& spec);

/// Physical focal shift at detector scale: px * mm/px.
inline double focal_shift_mm(double delta_px, double pixel_spacing) { return delta_px * pixel_spacing; }

}  // namespace carmtol
