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

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

#include "carmtol/errors.hpp"
#include "carmtol/geometry.hpp"
#include "carmtol/procrustes.hpp"

namespace carmtol {

/// Known 3D landmarks (mm) and their observed pixels, column-matched.
template <typename Scalar>
struct Correspondences {
  Points3<Scalar> points3;
  Points2<Scalar> points2;

  Correspondences(Points3<Scalar> p3, Points2<Scalar> p2)
      : points3(std::move(p3)), points2(std::move(p2)) {
    if (points3.cols() != points2.cols()) {
      throw DegenerateConfiguration("3D and 2D point counts differ");
    }
    if (!points3.allFinite() || !points2.allFinite()) {
      throw DegenerateConfiguration("correspondences contain non-finite entries");
    }
  }

  Eigen::Index size() const { return points3.cols(); }
};

struct RefineOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

/// A pose together with how the optimizer got there. `converged` is false
/// when the iteration cap was hit or the cost stalled before the step norm
/// dropped below tolerance; the pose is then the best one found.
template <typename Scalar>
struct PoseEstimate {
  CameraPose<Scalar> pose;
  bool converged = false;
  int iterations = 0;
  std::vector<Scalar> cost_history;  // sum of squared pixel residuals, per accepted step

  Scalar initial_cost() const { return cost_history.front(); }
  Scalar final_cost() const { return cost_history.back(); }
};

/// Sum of squared reprojection residuals (px²); +inf if any landmark falls
/// behind the camera.
template <typename Scalar>
Scalar reprojection_cost(const CameraPose<Scalar>& pose, const Correspondences<Scalar>& corr,
                         const CameraIntrinsics<Scalar>& intrinsics) {
  const Points3<Scalar> in_camera = pose.transform(corr.points3);
  Scalar cost(0);
  for (Eigen::Index i = 0; i < corr.size(); ++i) {
    const Vector3<Scalar> y = in_camera.col(i);
    if (!(y.z() > min_depth<Scalar>())) {
      return std::numeric_limits<Scalar>::infinity();
    }
    const Scalar xn = y.x() / y.z();
    const Scalar yn = y.y() / y.z();
    const Scalar du = intrinsics.fx() * (xn + intrinsics.skew() * yn) + intrinsics.cx() - corr.points2(0, i);
    const Scalar dv = intrinsics.fy() * yn + intrinsics.cy() - corr.points2(1, i);
    cost += du * du + dv * dv;
  }
  return cost;
}

namespace detail {

template <typename Scalar>
Matrix3<Scalar> rotation_exp(const Vector3<Scalar>& omega) {
  const Scalar angle = omega.norm();
  if (angle == Scalar(0)) return Matrix3<Scalar>::Identity();
  return Eigen::AngleAxis<Scalar>(angle, omega / angle).toRotationMatrix();
}

// Left-composed increment: R <- exp(omega) R, t <- t + dt.
template <typename Scalar>
CameraPose<Scalar> apply_increment(const CameraPose<Scalar>& pose,
                                   const Eigen::Matrix<Scalar, 6, 1>& delta) {
  const Matrix3<Scalar> r = rotation_exp<Scalar>(delta.template head<3>()) * pose.rotation();
  // Re-project onto SO(3) so long chains of increments stay within tolerance.
  Eigen::JacobiSVD<Matrix3<Scalar>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3<Scalar> clean = svd.matrixU() * svd.matrixV().transpose();
  return CameraPose<Scalar>(clean, pose.translation() + delta.template tail<3>());
}

// Normal equations of the reprojection residual w.r.t. (omega, dt).
template <typename Scalar>
void normal_equations(const CameraPose<Scalar>& pose, const Correspondences<Scalar>& corr,
                      const CameraIntrinsics<Scalar>& k, Eigen::Matrix<Scalar, 6, 6>& jtj,
                      Eigen::Matrix<Scalar, 6, 1>& jtr) {
  jtj.setZero();
  jtr.setZero();
  const Points3<Scalar> rotated = pose.rotation() * corr.points3;
  for (Eigen::Index i = 0; i < corr.size(); ++i) {
    const Vector3<Scalar> q = rotated.col(i);
    const Vector3<Scalar> y = q + pose.translation();
    const Scalar iz = Scalar(1) / y.z();
    const Scalar xn = y.x() * iz;
    const Scalar yn = y.y() * iz;

    Eigen::Matrix<Scalar, 2, 3> d_pixel;
    d_pixel << k.fx() * iz, k.fx() * k.skew() * iz, -k.fx() * (xn + k.skew() * yn) * iz,
               Scalar(0), k.fy() * iz, -k.fy() * yn * iz;

    Eigen::Matrix<Scalar, 3, 6> d_point;
    d_point << Scalar(0), q.z(), -q.y(), Scalar(1), Scalar(0), Scalar(0),
               -q.z(), Scalar(0), q.x(), Scalar(0), Scalar(1), Scalar(0),
               q.y(), -q.x(), Scalar(0), Scalar(0), Scalar(0), Scalar(1);

    const Eigen::Matrix<Scalar, 2, 6> j = d_pixel * d_point;
    const Vector2<Scalar> r(k.fx() * (xn + k.skew() * yn) + k.cx() - corr.points2(0, i),
                            k.fy() * yn + k.cy() - corr.points2(1, i));
    jtj.noalias() += j.transpose() * j;
    jtr.noalias() += j.transpose() * r;
  }
}

}  // namespace detail

/// Damped Gauss-Newton descent on the reprojection error with the intrinsics
/// held fixed. A Gauss-Newton step is tried first; if it does not lower the
/// cost, Levenberg-Marquardt damping is raised until one does. Only
/// cost-decreasing steps are accepted, so `cost_history` is non-increasing.
/// Stops when the undamped step norm (rad and mm mixed) falls below
/// `tolerance`, without applying that step.
template <typename Scalar>
PoseEstimate<Scalar> refine_pose(const CameraPose<Scalar>& initial,
                                 const Correspondences<Scalar>& corr,
                                 const CameraIntrinsics<Scalar>& intrinsics,
                                 const RefineOptions& options = {}) {
  if (!(options.tolerance > 0.0)) {
    throw DegenerateConfiguration("refinement tolerance must be positive");
  }
  PoseEstimate<Scalar> estimate{initial, false, 0, {}};
  Scalar cost = reprojection_cost(initial, corr, intrinsics);
  estimate.cost_history.push_back(cost);
  if (!std::isfinite(double(cost))) {
    return estimate;
  }

  using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
  using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;
  const Scalar tol = Scalar(options.tolerance);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Matrix6 jtj;
    Vector6 jtr;
    detail::normal_equations(estimate.pose, corr, intrinsics, jtj, jtr);

    const Vector6 gn_step = -jtj.ldlt().solve(jtr);
    if (gn_step.allFinite() && gn_step.norm() < tol) {
      estimate.converged = true;
      return estimate;
    }

    bool accepted = false;
    Scalar lambda(0);
    const Vector6 diag = jtj.diagonal().cwiseMax(Scalar(1e-12) * jtj.diagonal().maxCoeff());
    while (lambda <= Scalar(1e12)) {
      Matrix6 damped = jtj;
      damped.diagonal() += lambda * diag;
      const Vector6 step = lambda == Scalar(0) ? gn_step : Vector6(-damped.ldlt().solve(jtr));
      if (step.allFinite()) {
        const CameraPose<Scalar> candidate = detail::apply_increment(estimate.pose, step);
        const Scalar candidate_cost = reprojection_cost(candidate, corr, intrinsics);
        if (candidate_cost < cost) {
          estimate.pose = candidate;
          cost = candidate_cost;
          estimate.cost_history.push_back(cost);
          ++estimate.iterations;
          accepted = true;
          if (step.norm() < tol) {
            estimate.converged = true;
            return estimate;
          }
          break;
        }
      }
      lambda = lambda == Scalar(0) ? Scalar(1e-6) : lambda * Scalar(10);
    }
    if (!accepted) {
      // Cost cannot be lowered at any damping: at the floating-point floor.
      // Count as converged only if the undamped step is negligible relative
      // to the pose scale.
      const Scalar scale = Scalar(1) + estimate.pose.translation().norm();
      estimate.converged = gn_step.allFinite() && gn_step.norm() < Scalar(1e-6) * scale;
      return estimate;
    }
  }
  return estimate;
}

namespace detail {

// Closed-form EPnP on normalized image coordinates. Returns the candidate
// with the lowest reprojection cost over null-space dimensions 1..3.
template <typename Scalar>
CameraPose<Scalar> epnp(const Correspondences<Scalar>& corr, const CameraIntrinsics<Scalar>& k) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = corr.size();
  const Points3<Scalar>& world = corr.points3;

  const Vector3<Scalar> centroid = world.rowwise().mean();
  const Points3<Scalar> centered = world.colwise() - centroid;
  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> pca(centered * centered.transpose() /
                                                      Scalar(n));
  // Eigenvalues ascend; reorder to descending principal axes.
  const Vector3<Scalar> variances = pca.eigenvalues().reverse();
  const Matrix3<Scalar> axes = pca.eigenvectors().rowwise().reverse();
  if (!(variances(0) > Scalar(0)) || variances(1) <= Scalar(1e-18) * variances(0)) {
    throw DegenerateConfiguration("landmarks are collinear");
  }
  using std::sqrt;
  const bool planar = sqrt(std::max(variances(2), Scalar(0)) / variances(0)) < Scalar(1e-4);
  const int num_control = planar ? 3 : 4;

  // Control points: centroid plus one point along each principal axis.
  std::vector<Vector3<Scalar>> control(num_control);
  control[0] = centroid;
  for (int a = 1; a < num_control; ++a) {
    control[a] = centroid + sqrt(variances(a - 1)) * axes.col(a - 1);
  }

  // Barycentric weights; the axes are orthogonal so each weight is a scaled
  // projection onto its axis.
  MatrixX alphas(n, num_control);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar rest(1);
    for (int a = 1; a < num_control; ++a) {
      alphas(i, a) = axes.col(a - 1).dot(centered.col(i)) / sqrt(variances(a - 1));
      rest -= alphas(i, a);
    }
    alphas(i, 0) = rest;
  }

  const int dim = 3 * num_control;
  MatrixX m(2 * n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector2<Scalar> xn = k.normalize(Vector2<Scalar>(corr.points2.col(i)));
    for (int a = 0; a < num_control; ++a) {
      const Scalar w = alphas(i, a);
      m.block(2 * i, 3 * a, 2, 3) << w, Scalar(0), -w * xn.x(),
                                     Scalar(0), w, -w * xn.y();
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixX> null_space(m.transpose() * m);
  const MatrixX& kernel = null_space.eigenvectors();  // ascending eigenvalues

  // Pairwise control-point distances are preserved by the rigid motion.
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < num_control; ++a) {
    for (int b = a + 1; b < num_control; ++b) pairs.emplace_back(a, b);
  }
  const Eigen::Index num_pairs = static_cast<Eigen::Index>(pairs.size());
  VectorX rho(num_pairs);
  for (Eigen::Index p = 0; p < num_pairs; ++p) {
    rho(p) = (control[pairs[p].first] - control[pairs[p].second]).squaredNorm();
  }

  CameraPose<Scalar> best;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();

  for (int dims = 1; dims <= 3; ++dims) {
    // diffs[p][k]: difference between the pair's control points in kernel vector k.
    std::vector<std::vector<Vector3<Scalar>>> diffs(num_pairs, std::vector<Vector3<Scalar>>(dims));
    for (Eigen::Index p = 0; p < num_pairs; ++p) {
      for (int kk = 0; kk < dims; ++kk) {
        const auto v = kernel.col(kk);
        diffs[p][kk] = v.template segment<3>(3 * pairs[p].first) -
                       v.template segment<3>(3 * pairs[p].second);
      }
    }

    // Linearized distance constraints in the products beta_a * beta_b.
    const int num_products = dims * (dims + 1) / 2;
    MatrixX lin(num_pairs, num_products);
    for (Eigen::Index p = 0; p < num_pairs; ++p) {
      int col = 0;
      for (int a = 0; a < dims; ++a) {
        for (int b = a; b < dims; ++b) {
          lin(p, col++) = (a == b ? Scalar(1) : Scalar(2)) * diffs[p][a].dot(diffs[p][b]);
        }
      }
    }
    VectorX products = lin.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rho);
    if (products(0) < Scalar(0)) products = -products;

    VectorX beta = VectorX::Zero(dims);
    beta(0) = sqrt(products(0));
    if (beta(0) > Scalar(0)) {
      // products are ordered (0,0), (0,1), ..., (0,dims-1), (1,1), ...
      for (int b = 1; b < dims; ++b) beta(b) = products(b) / beta(0);
    }

    // Gauss-Newton on the exact quadratic distance constraints.
    for (int it = 0; it < 10; ++it) {
      MatrixX jac(num_pairs, dims);
      VectorX res(num_pairs);
      for (Eigen::Index p = 0; p < num_pairs; ++p) {
        Vector3<Scalar> d = Vector3<Scalar>::Zero();
        for (int kk = 0; kk < dims; ++kk) d += beta(kk) * diffs[p][kk];
        res(p) = d.squaredNorm() - rho(p);
        for (int kk = 0; kk < dims; ++kk) jac(p, kk) = Scalar(2) * d.dot(diffs[p][kk]);
      }
      const VectorX step = jac.colPivHouseholderQr().solve(-res);
      if (!step.allFinite()) break;
      beta += step;
      if (step.norm() <= Scalar(1e-14) * (Scalar(1) + beta.norm())) break;
    }

    Points3<Scalar> camera_control(3, num_control);
    camera_control.setZero();
    for (int a = 0; a < num_control; ++a) {
      for (int kk = 0; kk < dims; ++kk) {
        camera_control.col(a) += beta(kk) * kernel.col(kk).template segment<3>(3 * a);
      }
    }
    Points3<Scalar> in_camera = camera_control * alphas.transpose();
    if (in_camera.row(2).mean() < Scalar(0)) in_camera = -in_camera;
    if (!in_camera.allFinite()) continue;

    try {
      const auto fit = procrustes_rigid(world, in_camera);
      const CameraPose<Scalar> candidate(fit.rotation, fit.translation);
      const Scalar cost = reprojection_cost(candidate, corr, k);
      if (cost < best_cost) {
        best_cost = cost;
        best = candidate;
      }
    } catch (const Error&) {
      // A collapsed candidate; the other null-space dimensions still compete.
    }
  }
  if (!std::isfinite(double(best_cost))) {
    throw DegenerateConfiguration("EPnP produced no valid pose");
  }
  return best;
}

}  // namespace detail

/// Closed-form EPnP initialization (four control points, or three for a
/// planar landmark set) without refinement.
template <typename Scalar>
CameraPose<Scalar> epnp_initial_pose(const Correspondences<Scalar>& corr,
                                     const CameraIntrinsics<Scalar>& intrinsics) {
  if (corr.size() < 4) {
    throw DegenerateConfiguration("PnP needs at least 4 correspondences");
  }
  return detail::epnp(corr, intrinsics);
}

/// Camera pose from known landmarks under the given (possibly wrong)
/// intrinsics: EPnP followed by refine_pose.
template <typename Scalar>
PoseEstimate<Scalar> solve_pnp(const Correspondences<Scalar>& corr,
                               const CameraIntrinsics<Scalar>& intrinsics,
                               const RefineOptions& options = {}) {
  return refine_pose(epnp_initial_pose(corr, intrinsics), corr, intrinsics, options);
}

}  // namespace carmtol
