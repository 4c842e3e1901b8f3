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
#include <Eigen/SVD>
#include <cmath>

#include "carmtol/errors.hpp"
#include "carmtol/geometry.hpp"

namespace carmtol {

namespace detail {

// Scales P so its third row has a unit rotation part; w is then the depth.
template <typename Scalar>
Matrix34<Scalar> depth_normalized(const Matrix34<Scalar>& p) {
  const Scalar n = p.row(2).template head<3>().norm();
  if (!(n > Scalar(0))) {
    throw IllConditioned("camera matrix has no depth row");
  }
  return p / n;
}

template <typename Scalar>
Vector3<Scalar> camera_center(const Matrix34<Scalar>& p) {
  const Matrix3<Scalar> m = p.template leftCols<3>();
  const Eigen::FullPivLU<Matrix3<Scalar>> lu(m);
  if (!lu.isInvertible()) {
    throw IllConditioned("camera matrix is not finite-center projective");
  }
  return -lu.solve(p.col(3));
}

}  // namespace detail

/// Homogeneous two-view DLT in pixel space: the point is the right singular
/// vector of the smallest singular value of the stacked cross-product rows.
/// Each camera matrix is first scaled so its homogeneous weight is the depth
/// in mm, which makes a row's residual depth times its pixel residual and
/// leaves the answer unchanged under any positive rescaling of either matrix.
/// World coordinates are conditioned on the two camera centers.
///
/// Throws IllConditioned for a zero baseline or when the null space is not
/// one-dimensional, and AtInfinity when the homogeneous weight vanishes or the
/// solution is not in front of both cameras.
template <typename Scalar>
Vector3<Scalar> triangulate_linear(const Matrix34<Scalar>& pa_in, const Matrix34<Scalar>& pb_in,
                                   const Vector2<Scalar>& xa, const Vector2<Scalar>& xb) {
  using std::abs;
  if (!xa.allFinite() || !xb.allFinite() || !pa_in.allFinite() || !pb_in.allFinite()) {
    throw IllConditioned("non-finite triangulation input");
  }
  const Matrix34<Scalar> pa = detail::depth_normalized(pa_in);
  const Matrix34<Scalar> pb = detail::depth_normalized(pb_in);

  const Vector3<Scalar> ca = detail::camera_center(pa);
  const Vector3<Scalar> cb = detail::camera_center(pb);
  const Scalar half_baseline = (ca - cb).norm() / Scalar(2);
  if (!(half_baseline > Scalar(1e-12) * (Scalar(1) + ca.norm() + cb.norm()))) {
    throw IllConditioned("zero baseline");
  }
  // X = midpoint + half_baseline * Y
  Eigen::Matrix<Scalar, 4, 4> cond = Eigen::Matrix<Scalar, 4, 4>::Identity();
  cond.template topLeftCorner<3, 3>() *= half_baseline;
  cond.template topRightCorner<3, 1>() = (ca + cb) / Scalar(2);
  const Matrix34<Scalar> qa = pa * cond;
  const Matrix34<Scalar> qb = pb * cond;

  Eigen::Matrix<Scalar, 4, 4> design;
  design.row(0) = xa.x() * qa.row(2) - qa.row(0);
  design.row(1) = xa.y() * qa.row(2) - qa.row(1);
  design.row(2) = xb.x() * qb.row(2) - qb.row(0);
  design.row(3) = xb.y() * qb.row(2) - qb.row(1);

  Eigen::JacobiSVD<Eigen::Matrix<Scalar, 4, 4>> svd(design, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(2) <= Scalar(1e-12) * sv(0) || sv(3) / sv(2) > Scalar(1) - Scalar(1e-9)) {
    throw IllConditioned("rays are parallel or coincident");
  }
  const Eigen::Matrix<Scalar, 4, 1> y = svd.matrixV().col(3);
  if (abs(y(3)) < Scalar(1e-12) * y.template head<3>().norm()) {
    throw AtInfinity("triangulated point is at infinity");
  }
  const Vector3<Scalar> point = (cond * y).template head<3>() / y(3);
  if (!(pa.row(2).dot(point.homogeneous()) > Scalar(0)) ||
      !(pb.row(2).dot(point.homogeneous()) > Scalar(0))) {
    throw AtInfinity("no triangulated solution in front of both cameras");
  }
  return point;
}

template <typename Scalar>
Vector3<Scalar> triangulate_linear(const ProjectiveCamera<Scalar>& cam_a,
                                   const ProjectiveCamera<Scalar>& cam_b,
                                   const Vector2<Scalar>& px_a, const Vector2<Scalar>& px_b) {
  return triangulate_linear<Scalar>(projection_matrix(cam_a), projection_matrix(cam_b), px_a, px_b);
}

template <typename Scalar>
Points3<Scalar> triangulate_linear(const ProjectiveCamera<Scalar>& cam_a,
                                   const ProjectiveCamera<Scalar>& cam_b,
                                   const Points2<Scalar>& px_a, const Points2<Scalar>& px_b) {
  if (px_a.cols() != px_b.cols()) {
    throw IllConditioned("pixel sets differ in size");
  }
  Points3<Scalar> points(3, px_a.cols());
  for (Eigen::Index i = 0; i < px_a.cols(); ++i) {
    points.col(i) = triangulate_linear(cam_a, cam_b, Vector2<Scalar>(px_a.col(i)),
                                       Vector2<Scalar>(px_b.col(i)));
  }
  return points;
}

}  // namespace carmtol
