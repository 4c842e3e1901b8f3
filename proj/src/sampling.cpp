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

#include "carmtol/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace carmtol {

void VolumeSpec::validate() const {
  if (!center.allFinite()) throw InvalidVolume("volume center must be finite");
  if (!(half_extent.array() > 0.0).all() || !half_extent.allFinite()) {
    throw InvalidVolume("volume half extents must be strictly positive");
  }
}

Points3d sample_volume(const VolumeSpec& spec, int n, Rng& rng) {
  spec.validate();
  if (n < 1) throw InvalidVolume("sample count must be at least 1");
  Points3d points(3, n);
  for (int i = 0; i < n; ++i) {
    for (int axis = 0; axis < 3; ++axis) {
      points(axis, i) = spec.center(axis) + spec.half_extent(axis) * rng.symmetric();
    }
  }
  return points;
}

Points3d sample_volume(const VolumeSpec& spec, int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_volume(spec, n, rng);
}

namespace {

double border_distance(const Vector2d& px, int width, int height) {
  return std::min({px.x(), px.y(), width - px.x(), height - px.y()});
}

}  // namespace

std::vector<PointScore> score_points(const Points3d& points, const BiplanarRigd& rig,
                                     const FilterSpec& filters) {
  std::vector<PointScore> scores(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    PointScore& s = scores[static_cast<std::size_t>(i)];
    const Vector3d p = points.col(i);
    if (!(depth(rig.ap(), p) > min_depth<double>()) || !(depth(rig.lat(), p) > min_depth<double>())) {
      continue;
    }
    s.ap_pixel = project(rig.ap(), p);
    s.lat_pixel = project(rig.lat(), p);
    const double d_ap = border_distance(s.ap_pixel, rig.image_width(), rig.image_height());
    const double d_lat = border_distance(s.lat_pixel, rig.image_width(), rig.image_height());
    s.inside = d_ap >= 0.0 && d_lat >= 0.0;
    s.edge_score = std::sqrt(0.5 * (d_ap * d_ap + d_lat * d_lat));
    s.disparity = (s.ap_pixel - s.lat_pixel).norm();
    s.kept = s.inside && s.edge_score >= filters.edge_margin && s.disparity >= filters.min_disparity;
  }
  return scores;
}

Points3d filter_points(const Points3d& points, const BiplanarRigd& rig, const FilterSpec& filters) {
  const auto scores = score_points(points, rig, filters);
  const auto kept = std::count_if(scores.begin(), scores.end(), [](const PointScore& s) { return s.kept; });
  Points3d out(3, kept);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (scores[static_cast<std::size_t>(i)].kept) out.col(j++) = points.col(i);
  }
  return out;
}

void PhantomLayout::validate() const {
  if (rows < 1 || cols < 1 || planes < 1) {
    throw InvalidVolume("phantom rows, cols and planes must be at least 1");
  }
  if (!(pitch > 0.0)) throw InvalidVolume("phantom pitch must be positive");
  if (planes > 1 && !(plane_separation > 0.0)) {
    throw InvalidVolume("phantom plane separation must be positive");
  }
  if (!std::isfinite(yaw_deg) || !center.allFinite()) {
    throw InvalidVolume("phantom yaw and center must be finite");
  }
}

Points3d phantom_layout_points(const PhantomLayout& layout) {
  layout.validate();
  const double yaw = layout.yaw_deg * EIGEN_PI / 180.0;
  Matrix3d turn;
  turn << std::cos(yaw), 0.0, std::sin(yaw),
          0.0, 1.0, 0.0,
          -std::sin(yaw), 0.0, std::cos(yaw);

  Points3d points(3, layout.rows * layout.cols * layout.planes);
  Eigen::Index k = 0;
  for (int p = 0; p < layout.planes; ++p) {
    for (int r = 0; r < layout.rows; ++r) {
      for (int c = 0; c < layout.cols; ++c) {
        const Vector3d local((c - 0.5 * (layout.cols - 1)) * layout.pitch,
                             (r - 0.5 * (layout.rows - 1)) * layout.pitch,
                             (p - 0.5 * (layout.planes - 1)) * layout.plane_separation);
        points.col(k++) = turn * local + layout.center;
      }
    }
  }
  return points;
}

Points3d phantom_points(const PhantomLayout& layout, const BiplanarRigd& rig,
                        const FilterSpec& filters) {
  Points3d points = phantom_layout_points(layout);
  const auto scores = score_points(points, rig, filters);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].kept) {
      throw LayoutNotVisible("phantom marker " + std::to_string(i) +
                             " fails the visibility filters under this rig");
    }
  }
  return points;
}

}  // namespace carmtol
