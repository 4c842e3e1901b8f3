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
#include <Eigen/SVD>
#include <cmath>

#include "carmtol/errors.hpp"
#include "carmtol/geometry.hpp"

namespace carmtol {

/// Rigid transform mapping a source set onto a target set, plus the RMS of
/// the residual distances after applying it (mm).
template <typename Scalar>
struct AlignmentResult {
  Matrix3<Scalar> rotation;
  Vector3<Scalar> translation;
  Scalar rmse;

  template <typename Derived>
  Points3<Scalar> apply(const Eigen::MatrixBase<Derived>& points) const {
    return (rotation * points).colwise() + translation;
  }
};

namespace detail {

// A point set is degenerate for rigid alignment when its centered spread has
// rank below 2 (all points on one line or coincident).
template <typename Derived>
bool is_collinear(const Eigen::MatrixBase<Derived>& centered) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Points3<Scalar>> svd(centered);
  const auto& sv = svd.singularValues();
  return !(sv(0) > Scalar(0)) || sv(1) <= Scalar(1e-9) * sv(0);
}

}  // namespace detail

/// Least-squares rigid alignment (rotation + translation, no scale) of
/// `source` onto `target`, both 3 x n with matching columns. Reflections are
/// excluded by flipping the sign of the smallest singular direction.
/// Throws DegenerateConfiguration for collinear input.
template <typename DerivedS, typename DerivedT>
AlignmentResult<typename DerivedS::Scalar> procrustes_rigid(
    const Eigen::MatrixBase<DerivedS>& source, const Eigen::MatrixBase<DerivedT>& target) {
  using Scalar = typename DerivedS::Scalar;
  static_assert(DerivedS::RowsAtCompileTime == 3 && DerivedT::RowsAtCompileTime == 3,
                "point sets must be 3 x n");
  const Eigen::Index n = source.cols();
  if (n != target.cols()) {
    throw DegenerateConfiguration("source and target sizes differ");
  }
  if (n < 3) {
    throw DegenerateConfiguration("rigid alignment needs at least 3 points");
  }
  if (!source.allFinite() || !target.allFinite()) {
    throw DegenerateConfiguration("point sets contain non-finite coordinates");
  }

  const Vector3<Scalar> source_mean = source.rowwise().mean();
  const Vector3<Scalar> target_mean = target.rowwise().mean();
  const Points3<Scalar> source_centered = source.colwise() - source_mean;
  const Points3<Scalar> target_centered = target.colwise() - target_mean;
  if (detail::is_collinear(source_centered) || detail::is_collinear(target_centered)) {
    throw DegenerateConfiguration("collinear point set: rotation about the line is unobservable");
  }

  const Matrix3<Scalar> cross = source_centered * target_centered.transpose();
  Eigen::JacobiSVD<Matrix3<Scalar>> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector3<Scalar> signs = Vector3<Scalar>::Ones();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < Scalar(0)) {
    signs(2) = Scalar(-1);
  }

  AlignmentResult<Scalar> result;
  result.rotation = svd.matrixV() * signs.asDiagonal() * svd.matrixU().transpose();
  result.translation = target_mean - result.rotation * source_mean;
  using std::sqrt;
  result.rmse = sqrt((result.apply(source) - target).colwise().squaredNorm().mean());
  return result;
}

}  // namespace carmtol
