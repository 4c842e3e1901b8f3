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

#include "carmtol/geometry.hpp"

#include <cmath>

namespace carmtol {

namespace {

// Rotation about world +y (vertical) by `radians`.
Matrix3d rotation_about_vertical(double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  Matrix3d r;
  r << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return r;
}

}  // namespace

BiplanarRigd build_default_rig(const RigConfig& config) {
  if (!(config.focal_ap > 0.0) || !(config.focal_lat > 0.0)) {
    throw InvalidRigConfig("focal lengths must be positive");
  }
  if (!(config.distance_ap > 0.0) || !(config.distance_lat > 0.0)) {
    throw InvalidRigConfig("source-to-object distances must be positive");
  }
  if (config.image_width <= 0 || config.image_height <= 0) {
    throw InvalidRigConfig("image dimensions must be positive");
  }
  if (!(config.pixel_spacing > 0.0)) {
    throw InvalidRigConfig("pixel spacing must be positive");
  }
  if (!(config.view_angle_deg > 10.0 && config.view_angle_deg < 170.0)) {
    throw InvalidRigConfig("view angle must lie strictly between 10 and 170 degrees");
  }

  const double cx = 0.5 * config.image_width;
  const double cy = 0.5 * config.image_height;

  // AP camera: x right (+x world), y down (-y world), looking along -z.
  Matrix3d r_ap;
  r_ap << 1.0, 0.0, 0.0,
          0.0, -1.0, 0.0,
          0.0, 0.0, -1.0;
  const Vector3d c_ap(0.0, 0.0, config.distance_ap);

  const Matrix3d turn = rotation_about_vertical(config.view_angle_deg * EIGEN_PI / 180.0);
  const Matrix3d r_lat = r_ap * turn.transpose();
  const Vector3d c_lat = turn * Vector3d(0.0, 0.0, config.distance_lat);

  ProjectiveCamerad ap{CameraIntrinsicsd(config.focal_ap, config.focal_ap, cx, cy),
                       CameraPosed(r_ap, -r_ap * c_ap)};
  ProjectiveCamerad lat{CameraIntrinsicsd(config.focal_lat, config.focal_lat, cx, cy),
                        CameraPosed(r_lat, -r_lat * c_lat)};
  return BiplanarRigd(std::move(ap), std::move(lat), config.image_width, config.image_height,
                      config.pixel_spacing);
}

}  // namespace carmtol
