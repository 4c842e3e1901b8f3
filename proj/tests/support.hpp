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


// Shared fixtures and independent reference implementations for the tests.
#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <functional>

#include "carmtol/geometry.hpp"
#include "carmtol/rng.hpp"

namespace carmtol::testing {

inline Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized().toRotationMatrix();
}

// Rotation by at most `max_angle` radians about a random axis.
inline Matrix3d small_rotation(Rng& rng, double max_angle) {
  Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  return Eigen::AngleAxisd(max_angle * rng.uniform(), axis.normalized()).toRotationMatrix();
}

inline Vector3d random_vector(Rng& rng, double half_extent) {
  return Vector3d(rng.symmetric(), rng.symmetric(), rng.symmetric()) * half_extent;
}

inline double geodesic_angle(const Matrix3d& a, const Matrix3d& b) {
  return Eigen::AngleAxisd(a.transpose() * b).angle();
}

inline Points3d random_points(Rng& rng, int n, double half_extent) {
  Points3d p(3, n);
  for (int i = 0; i < n; ++i) p.col(i) = random_vector(rng, half_extent);
  return p;
}

// A camera `distance` mm from the origin looking at it, with random roll.
inline CameraPose<double> random_looking_pose(Rng& rng, double distance) {
  const Vector3d center = Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized() * distance;
  const Vector3d z = (-center).normalized();
  Vector3d helper = std::abs(z.x()) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
  Vector3d x = helper.cross(z).normalized();
  Vector3d y = z.cross(x);
  const Matrix3d roll = Eigen::AngleAxisd(2.0 * EIGEN_PI * rng.uniform(), Vector3d::UnitZ()).toRotationMatrix();
  Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  r = roll * r;
  return CameraPose<double>(r, -r * center);
}

inline double pixel_cost(const ProjectiveCamera<double>& cam, const Vector3d& x, const Vector2d& px) {
  const Vector3d c = cam.intrinsics.matrix() * (cam.pose.rotation() * x + cam.pose.translation());
  return (c.head<2>() / c.z() - px).squaredNorm();
}

// Golden-section minimum of f on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-12) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Two-view geometric triangulation: minimizes the summed squared pixel error
// by nested golden-section searches over the depths along both rays, then a
// cyclic golden-section polish in a frame spanned by the rays. Unrelated to
// the linear algebraic solver on purpose.
inline Vector3d triangulate_nonlinear(const ProjectiveCamera<double>& a, const ProjectiveCamera<double>& b,
                                      const Vector2d& pa, const Vector2d& pb) {
  auto ray = [](const ProjectiveCamera<double>& cam, const Vector2d& px) {
    const Vector3d d = cam.pose.rotation().transpose() * cam.intrinsics.normalize(px).homogeneous();
    return d.normalized();
  };
  const Vector3d ca = a.pose.center(), cb = b.pose.center();
  const Vector3d da = ray(a, pa), db = ray(b, pb);
  auto cost = [&](const Vector3d& x) { return pixel_cost(a, x, pa) + pixel_cost(b, x, pb); };

  const double range = 4.0 * ((ca - cb).norm() + ca.norm() + cb.norm());
  auto inner = [&](double s) {
    const Vector3d xa = ca + s * da;
    auto g = [&](double t) { return (xa - (cb + t * db)).squaredNorm(); };
    return cb + golden_section(g, 0.0, range) * db;
  };
  // Midpoint of closest approach as the start.
  const double s0 = golden_section(
      [&](double s) { return (ca + s * da - inner(s)).squaredNorm(); }, 0.0, range);
  Vector3d x = 0.5 * (ca + s0 * da + inner(s0));

  Eigen::Matrix3d frame;
  frame.col(0) = da;
  frame.col(1) = (db - db.dot(da) * da).normalized();
  frame.col(2) = da.cross(frame.col(1));
  for (int sweep = 0; sweep < 200; ++sweep) {
    const Vector3d before = x;
    for (int k = 0; k < 3; ++k) {
      const Vector3d dir = frame.col(k);
      const double h = golden_section([&](double t) { return cost(x + t * dir); }, -5.0, 5.0, 1e-11);
      x += h * dir;
    }
    if ((x - before).norm() < 1e-10) break;
  }
  return x;
}

// Single-pass (Welford) mean and population standard deviation.
struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double population_std() const { return n > 0 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0; }
};

}  // namespace carmtol::testing
