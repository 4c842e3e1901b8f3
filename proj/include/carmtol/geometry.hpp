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

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "carmtol/errors.hpp"

namespace carmtol {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix34 = Eigen::Matrix<Scalar, 3, 4>;

// Point sets are stored one point per column.
template <typename Scalar> using Points2 = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;
template <typename Scalar> using Points3 = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

using Vector2d = Vector2<double>;
using Vector3d = Vector3<double>;
using Matrix3d = Matrix3<double>;
using Matrix34d = Matrix34<double>;
using Points2d = Points2<double>;
using Points3d = Points3<double>;

// Tolerance for RᵀR = I and det R = 1.
template <typename Scalar>
constexpr Scalar rotation_tolerance() {
  return std::max<Scalar>(Scalar(1e-9), Scalar(100) * std::numeric_limits<Scalar>::epsilon());
}

// Depth at or below which a point counts as behind the camera, in mm.
template <typename Scalar>
constexpr Scalar min_depth() {
  return Scalar(1e-9);
}

/// Pinhole intrinsics in pixels. Units: fx, fy, cx, cy in px; skew dimensionless.
template <typename Scalar>
class CameraIntrinsics {
 public:
  CameraIntrinsics(Scalar fx, Scalar fy, Scalar cx, Scalar cy, Scalar skew = Scalar(0))
      : fx_(fx), fy_(fy), cx_(cx), cy_(cy), skew_(skew) {
    using std::isfinite;
    if (!(isfinite(fx) && fx > Scalar(0)) || !(isfinite(fy) && fy > Scalar(0))) {
      throw InvalidCamera("focal lengths must be positive and finite");
    }
    if (!isfinite(cx) || !isfinite(cy) || !isfinite(skew)) {
      throw InvalidCamera("principal point and skew must be finite");
    }
  }

  Scalar fx() const { return fx_; }
  Scalar fy() const { return fy_; }
  Scalar cx() const { return cx_; }
  Scalar cy() const { return cy_; }
  Scalar skew() const { return skew_; }
  Vector2<Scalar> principal_point() const { return {cx_, cy_}; }

  /// K = [fx s cx; 0 fy cy; 0 0 1]. Skew is stored dimensionless and scaled by fx.
  Matrix3<Scalar> matrix() const {
    Matrix3<Scalar> k;
    k << fx_, skew_ * fx_, cx_,
         Scalar(0), fy_, cy_,
         Scalar(0), Scalar(0), Scalar(1);
    return k;
  }

  Matrix3<Scalar> inverse_matrix() const {
    const Scalar s = skew_ * fx_;
    Matrix3<Scalar> k_inv;
    k_inv << Scalar(1) / fx_, -s / (fx_ * fy_), (s * cy_ - cx_ * fy_) / (fx_ * fy_),
             Scalar(0), Scalar(1) / fy_, -cy_ / fy_,
             Scalar(0), Scalar(0), Scalar(1);
    return k_inv;
  }

  /// Pixel to normalized image coordinates (z = 1 plane of the camera frame).
  Vector2<Scalar> normalize(const Vector2<Scalar>& pixel) const {
    const Scalar y = (pixel.y() - cy_) / fy_;
    const Scalar x = (pixel.x() - cx_ - skew_ * fx_ * y) / fx_;
    return {x, y};
  }

  bool operator==(const CameraIntrinsics&) const = default;

 private:
  Scalar fx_;
  Scalar fy_;
  Scalar cx_;
  Scalar cy_;
  Scalar skew_;
};

/// Rigid world-to-camera transform, x_cam = R x_world + t. Translation in mm.
template <typename Scalar>
class CameraPose {
 public:
  CameraPose() : rotation_(Matrix3<Scalar>::Identity()), translation_(Vector3<Scalar>::Zero()) {}

  CameraPose(const Matrix3<Scalar>& rotation, const Vector3<Scalar>& translation)
      : rotation_(rotation), translation_(translation) {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw InvalidCamera("pose has non-finite entries");
    }
    const Scalar tol = rotation_tolerance<Scalar>();
    const Scalar ortho_err =
        (rotation.transpose() * rotation - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff();
    if (ortho_err > tol) {
      throw InvalidCamera("rotation is not orthonormal");
    }
    using std::abs;
    if (abs(rotation.determinant() - Scalar(1)) > tol) {
      throw InvalidCamera("rotation determinant is not +1");
    }
  }

  const Matrix3<Scalar>& rotation() const { return rotation_; }
  const Vector3<Scalar>& translation() const { return translation_; }

  /// Camera center in world coordinates, C = -Rᵀt.
  Vector3<Scalar> center() const { return -rotation_.transpose() * translation_; }

  /// Optical axis (camera +z) expressed in the world frame.
  Vector3<Scalar> view_direction() const { return rotation_.row(2).transpose(); }

  Vector3<Scalar> transform(const Vector3<Scalar>& world_point) const {
    return rotation_ * world_point + translation_;
  }

  Points3<Scalar> transform(const Points3<Scalar>& world_points) const {
    return (rotation_ * world_points).colwise() + translation_;
  }

  Matrix34<Scalar> matrix() const {
    Matrix34<Scalar> rt;
    rt << rotation_, translation_;
    return rt;
  }

  bool operator==(const CameraPose&) const = default;

 private:
  Matrix3<Scalar> rotation_;
  Vector3<Scalar> translation_;
};

template <typename Scalar>
struct ProjectiveCamera {
  CameraIntrinsics<Scalar> intrinsics;
  CameraPose<Scalar> pose;

  bool operator==(const ProjectiveCamera&) const = default;
};

using CameraIntrinsicsd = CameraIntrinsics<double>;
using CameraPosed = CameraPose<double>;
using ProjectiveCamerad = ProjectiveCamera<double>;

/// P = K [R | t].
template <typename Scalar>
Matrix34<Scalar> projection_matrix(const ProjectiveCamera<Scalar>& camera) {
  return camera.intrinsics.matrix() * camera.pose.matrix();
}

/// Perspective division of P (X, 1). Throws BehindCamera when the homogeneous
/// depth is not positive.
template <typename Scalar>
Vector2<Scalar> project(const Matrix34<Scalar>& p, const Vector3<Scalar>& point) {
  const Vector3<Scalar> h = p * point.homogeneous();
  if (!(h.z() > Scalar(0))) {
    throw BehindCamera("point has non-positive projective depth");
  }
  return h.hnormalized();
}

template <typename Scalar>
Vector2<Scalar> project(const ProjectiveCamera<Scalar>& camera, const Vector3<Scalar>& point) {
  const Vector3<Scalar> in_camera = camera.pose.transform(point);
  if (!(in_camera.z() > min_depth<Scalar>())) {
    throw BehindCamera("point lies behind the camera (depth " + std::to_string(double(in_camera.z())) +
                       " mm)");
  }
  const auto& k = camera.intrinsics;
  const Scalar x = in_camera.x() / in_camera.z();
  const Scalar y = in_camera.y() / in_camera.z();
  return {k.fx() * (x + k.skew() * y) + k.cx(), k.fy() * y + k.cy()};
}

template <typename Scalar>
Points2<Scalar> project(const ProjectiveCamera<Scalar>& camera, const Points3<Scalar>& points) {
  Points2<Scalar> pixels(2, points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    pixels.col(i) = project(camera, Vector3<Scalar>(points.col(i)));
  }
  return pixels;
}

/// World point on the ray through `pixel` at camera-frame depth `depth` (mm).
template <typename Scalar>
Vector3<Scalar> back_project(const ProjectiveCamera<Scalar>& camera, const Vector2<Scalar>& pixel,
                             Scalar depth) {
  const Vector3<Scalar> in_camera = Vector3<Scalar>(camera.intrinsics.normalize(pixel).homogeneous()) * depth;
  return camera.pose.rotation().transpose() * (in_camera - camera.pose.translation());
}

template <typename Scalar>
Scalar depth(const ProjectiveCamera<Scalar>& camera, const Vector3<Scalar>& point) {
  return camera.pose.transform(point).z();
}

enum class View { ap, lat };

/// Two-view fluoroscopy geometry: anterior-posterior and lateral cameras
/// sharing one detector format.
template <typename Scalar>
class BiplanarRig {
 public:
  BiplanarRig(ProjectiveCamera<Scalar> ap, ProjectiveCamera<Scalar> lat, int image_width,
              int image_height, Scalar pixel_spacing)
      : ap_(std::move(ap)),
        lat_(std::move(lat)),
        image_width_(image_width),
        image_height_(image_height),
        pixel_spacing_(pixel_spacing) {
    if (image_width <= 0 || image_height <= 0) {
      throw InvalidRigConfig("image dimensions must be positive");
    }
    if (!(pixel_spacing > Scalar(0))) {
      throw InvalidRigConfig("pixel spacing must be positive");
    }
    const Scalar angle = view_angle_degrees();
    if (angle < Scalar(10) || angle > Scalar(170)) {
      throw InvalidRigConfig("AP and LAT optical axes are within 10 degrees of parallel");
    }
  }

  const ProjectiveCamera<Scalar>& ap() const { return ap_; }
  const ProjectiveCamera<Scalar>& lat() const { return lat_; }
  const ProjectiveCamera<Scalar>& camera(View v) const { return v == View::ap ? ap_ : lat_; }
  int image_width() const { return image_width_; }
  int image_height() const { return image_height_; }
  Scalar pixel_spacing() const { return pixel_spacing_; }

  /// Angle between the two optical axes, degrees.
  Scalar view_angle_degrees() const {
    using std::acos;
    const Scalar c = std::clamp<Scalar>(
        ap_.pose.view_direction().dot(lat_.pose.view_direction()), Scalar(-1), Scalar(1));
    return acos(c) * Scalar(180) / Scalar(EIGEN_PI);
  }

  bool operator==(const BiplanarRig&) const = default;

 private:
  ProjectiveCamera<Scalar> ap_;
  ProjectiveCamera<Scalar> lat_;
  int image_width_;
  int image_height_;
  Scalar pixel_spacing_;
};

using BiplanarRigd = BiplanarRig<double>;

/// Parameters of the synthetic rig. The world origin is the test-volume
/// center; the AP source sits on +z and the LAT source is the AP placement
/// rotated by `view_angle_deg` about the vertical (+y) axis, so at 90 degrees
/// it sits on +x. Distances are source-to-origin in mm.
struct RigConfig {
  double focal_ap = 4500.0;
  double focal_lat = 4550.0;
  int image_width = 1024;
  int image_height = 1024;
  double pixel_spacing = 0.21;
  double distance_ap = 500.0;
  double distance_lat = 250.0;
  double view_angle_deg = 90.0;

  /// Simulation defaults (9-inch detector, 1024² images).
  static RigConfig simulation() { return {}; }

  /// Phantom-mode defaults: longer focals and sources pulled back so the
  /// 120 mm marker grid fits both images.
  static RigConfig phantom() {
    RigConfig c;
    c.focal_ap = 4800.0;
    c.focal_lat = 4850.0;
    c.distance_ap = 800.0;
    c.distance_lat = 750.0;
    return c;
  }

  bool operator==(const RigConfig&) const = default;
};

/// Builds the ground-truth rig. Principal points sit at the image center,
/// fy = fx and skew = 0. Throws InvalidRigConfig.
BiplanarRigd build_default_rig(const RigConfig& config);

}  // namespace carmtol
