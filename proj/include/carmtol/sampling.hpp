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
#include <vector>

#include "carmtol/geometry.hpp"
#include "carmtol/rng.hpp"

namespace carmtol {

/// Axis-aligned test volume, mm.
struct VolumeSpec {
  Vector3d center = Vector3d::Zero();
  Vector3d half_extent = Vector3d::Constant(75.0);

  /// Throws InvalidVolume unless every half extent is strictly positive.
  void validate() const;
};

/// Thresholds in pixels. A point survives when its edge score (RMS over both
/// views of the distance to the nearest image border) and its disparity
/// (distance between its AP and LAT pixel coordinates) both reach them.
struct FilterSpec {
  double edge_margin = 40.0;
  double min_disparity = 40.0;
};

struct PointScore {
  Vector2d ap_pixel = Vector2d::Zero();
  Vector2d lat_pixel = Vector2d::Zero();
  double edge_score = 0.0;
  double disparity = 0.0;
  bool inside = false;  // in front of both sources and within both images
  bool kept = false;
};

/// n i.i.d. uniform points in the volume, one per column.
Points3d sample_volume(const VolumeSpec& spec, int n, Rng& rng);
Points3d sample_volume(const VolumeSpec& spec, int n, std::uint64_t seed);

std::vector<PointScore> score_points(const Points3d& points, const BiplanarRigd& rig,
                                     const FilterSpec& filters);

/// Points passing both filters, in input order.
Points3d filter_points(const Points3d& points, const BiplanarRigd& rig, const FilterSpec& filters);

/// Marker phantom: `planes` parallel rows x cols grids. Each grid lies in a
/// plane normal to the AP axis before the whole layout is yawed about the
/// vertical axis and moved to `center`.
struct PhantomLayout {
  int rows = 4;
  int cols = 4;
  int planes = 2;
  double pitch = 40.0;             // mm between neighboring markers
  double plane_separation = 60.0;  // mm between neighboring planes
  double yaw_deg = 45.0;
  Vector3d center = Vector3d::Zero();

  void validate() const;
};

/// Marker positions, plane-major then row-major.
Points3d phantom_layout_points(const PhantomLayout& layout);

/// Marker positions, checked against the filters under `rig`. Throws
/// LayoutNotVisible naming the first failing marker.
Points3d phantom_points(const PhantomLayout& layout, const BiplanarRigd& rig,
                        const FilterSpec& filters);

}  // namespace carmtol
