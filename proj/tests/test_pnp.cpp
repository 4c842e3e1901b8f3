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


#include "doctest.h"

#include "carmtol/pnp.hpp"
#include "carmtol/sampling.hpp"
#include "support.hpp"

using namespace carmtol;

namespace {

struct Scene {
  ProjectiveCamera<double> camera;
  Points3d points;
  Points2d pixels;
};

Scene random_scene(Rng& rng, int n) {
  Scene s{{CameraIntrinsicsd(4500.0, 4500.0, 512.0, 512.0), testing::random_looking_pose(rng, 400 + 500 * rng.uniform())},
          testing::random_points(rng, n, 75.0),
          {}};
  s.pixels = project(s.camera, s.points);
  return s;
}

}  // namespace

TEST_CASE("PnP recovers 32 phantom markers exactly") {
  const BiplanarRigd rig = build_default_rig(RigConfig::phantom());
  const Points3d markers = phantom_layout_points(PhantomLayout{});
  REQUIRE(markers.cols() == 32);
  for (View v : {View::ap, View::lat}) {
    const auto& cam = rig.camera(v);
    const auto est = solve_pnp(Correspondences<double>(markers, project(cam, markers)), cam.intrinsics);
    CHECK(est.converged);
    CHECK(testing::geodesic_angle(est.pose.rotation(), cam.pose.rotation()) < 1e-6);
    CHECK((est.pose.translation() - cam.pose.translation()).norm() < 1e-6);
  }
}

TEST_CASE("PnP round trip on random poses") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Scene s = random_scene(rng, 6 + trial % 40);
    const auto est = solve_pnp(Correspondences<double>(s.points, s.pixels), s.camera.intrinsics);
    CHECK(testing::geodesic_angle(est.pose.rotation(), s.camera.pose.rotation()) < 1e-6);
    CHECK((est.pose.translation() - s.camera.pose.translation()).norm() < 1e-6);
  }
}

TEST_CASE("PnP handles planar landmarks") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    Scene s = random_scene(rng, 12);
    s.points.row(2).setZero();
    s.pixels = project(s.camera, s.points);
    const auto est = solve_pnp(Correspondences<double>(s.points, s.pixels), s.camera.intrinsics);
    CHECK(testing::geodesic_angle(est.pose.rotation(), s.camera.pose.rotation()) < 1e-6);
    CHECK((est.pose.translation() - s.camera.pose.translation()).norm() < 1e-6);
  }
}

TEST_CASE("degenerate PnP inputs") {
  const CameraIntrinsicsd k(4500.0, 4500.0, 512.0, 512.0);
  Points3d axis(3, 6);
  for (int i = 0; i < 6; ++i) axis.col(i) = Vector3d(0.0, 0.0, 500.0 + 20.0 * i);
  const Points2d center = Vector2d(512.0, 512.0).replicate(1, 6);
  CHECK_THROWS_AS(solve_pnp(Correspondences<double>(axis, center), k), DegenerateConfiguration);

  CHECK_THROWS_AS(Correspondences<double>(Points3d::Zero(3, 5), Points2d::Zero(2, 4)), DegenerateConfiguration);
  Rng rng(23);
  const Scene s = random_scene(rng, 3);
  CHECK_THROWS_AS(solve_pnp(Correspondences<double>(s.points, s.pixels), k), DegenerateConfiguration);
}

TEST_CASE("PnP under a wrong focal is a local optimum of the reprojection cost") {
  const BiplanarRigd rig = build_default_rig(RigConfig::simulation());
  Rng rng(24);
  const Points3d landmarks = filter_points(sample_volume(VolumeSpec{}, 500, 7), rig, FilterSpec{});
  const auto& cam = rig.ap();
  const auto& k = cam.intrinsics;
  const CameraIntrinsicsd wrong(k.fx() + 500.0, k.fy() + 500.0, k.cx(), k.cy());
  const Correspondences<double> corr(landmarks, project(cam, landmarks));
  const auto est = solve_pnp(corr, wrong);
  REQUIRE(est.converged);
  CHECK(testing::geodesic_angle(est.pose.rotation(), cam.pose.rotation()) > 0.0);
  const double best = reprojection_cost(est.pose, corr, wrong);
  int lower = 0;
  for (int i = 0; i < 1000; ++i) {
    const Matrix3d dr = testing::small_rotation(rng, EIGEN_PI / 180.0);
    const Vector3d dt = Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized() * rng.uniform();
    const CameraPose<double> probe(dr * est.pose.rotation(), est.pose.translation() + dt);
    if (reprojection_cost(probe, corr, wrong) < best) ++lower;
  }
  CHECK(lower == 0);
}

TEST_CASE("PnP is equivariant under rigid motion of the landmarks") {
  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const Scene s = random_scene(rng, 20);
    const Matrix3d r0 = testing::random_rotation(rng);
    const Vector3d t0 = testing::random_vector(rng, 200.0);
    const Points3d moved = (r0 * s.points).colwise() + t0;

    const auto a = solve_pnp(Correspondences<double>(s.points, s.pixels), s.camera.intrinsics);
    const auto b = solve_pnp(Correspondences<double>(moved, s.pixels), s.camera.intrinsics);
    const Matrix3d expected_r = a.pose.rotation() * r0.transpose();
    const Vector3d expected_t = a.pose.translation() - expected_r * t0;
    CHECK(testing::geodesic_angle(b.pose.rotation(), expected_r) < 1e-6);
    CHECK((b.pose.translation() - expected_t).norm() < 1e-6);
  }
}

TEST_CASE("refine_pose at the truth") {
  Rng rng(26);
  const Scene s = random_scene(rng, 20);
  const Correspondences<double> corr(s.points, s.pixels);
  const auto est = refine_pose(s.camera.pose, corr, s.camera.intrinsics);
  CHECK(est.converged);
  CHECK(est.iterations == 0);
  CHECK(est.pose == s.camera.pose);

  RefineOptions capped;
  capped.max_iterations = 0;
  const CameraPose<double> off(testing::small_rotation(rng, 0.05) * s.camera.pose.rotation(), s.camera.pose.translation());
  const auto stopped = refine_pose(off, corr, s.camera.intrinsics, capped);
  CHECK_FALSE(stopped.converged);
  CHECK(stopped.iterations == 0);
  CHECK(stopped.pose == off);
}

TEST_CASE("refine_pose recovers a 2 degree rotation error") {
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    const Scene s = random_scene(rng, 20);
    const Vector3d axis = Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Matrix3d tilt = Eigen::AngleAxisd(2.0 * EIGEN_PI / 180.0, axis).toRotationMatrix();
    const CameraPose<double> start(tilt * s.camera.pose.rotation(), s.camera.pose.translation());
    const auto est = refine_pose(start, Correspondences<double>(s.points, s.pixels), s.camera.intrinsics);
    CHECK(est.converged);
    CHECK(testing::geodesic_angle(est.pose.rotation(), s.camera.pose.rotation()) < 1e-8);
  }
}

TEST_CASE("refine_pose cost history never increases") {
  Rng rng(28);
  for (int trial = 0; trial < 200; ++trial) {
    const Scene s = random_scene(rng, 15);
    const CameraIntrinsicsd wrong(4500.0 + 700.0 * rng.symmetric(), 4500.0 + 700.0 * rng.symmetric(),
                                  512.0 + 200.0 * rng.symmetric(), 512.0 + 200.0 * rng.symmetric());
    const CameraPose<double> start(testing::small_rotation(rng, 0.1) * s.camera.pose.rotation(),
                                   s.camera.pose.translation() + testing::random_vector(rng, 20.0));
    const auto est = refine_pose(start, Correspondences<double>(s.points, s.pixels), wrong);
    REQUIRE_FALSE(est.cost_history.empty());
    for (std::size_t i = 1; i < est.cost_history.size(); ++i) {
      CHECK(est.cost_history[i] <= est.cost_history[i - 1]);
    }
    CHECK(est.final_cost() <= est.initial_cost());
  }
}
