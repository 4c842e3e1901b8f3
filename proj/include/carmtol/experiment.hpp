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
#include <string>
#include <vector>

#include "carmtol/config.hpp"
#include "carmtol/geometry.hpp"
#include "carmtol/perturbation.hpp"
#include "carmtol/pnp.hpp"
#include "carmtol/rng.hpp"

namespace carmtol {

struct TrialResult {
  bool ok = false;
  std::string failure;  // set when !ok

  double recon_rmse = 0.0;            // mm, after rigid alignment
  double recon_rmse_unaligned = 0.0;  // mm, raw distances to ground truth
  double reproj_ap = 0.0;             // px, mean over points
  double reproj_lat = 0.0;
  double focal_delta_ap = 0.0;  // px
  double focal_delta_lat = 0.0;
  Vector2d pp_delta_ap = Vector2d::Zero();
  Vector2d pp_delta_lat = Vector2d::Zero();
  bool converged_ap = false;
  bool converged_lat = false;
};

struct TrialOptions {
  RefineOptions refine;
  double pixel_noise = 0.0;  // px std dev added to every observation
};

/// RMS distance after rigid Procrustes alignment of `reconstructed` onto
/// `ground_truth` (mm).
double recon_error_rmse(const Points3d& reconstructed, const Points3d& ground_truth);

/// Mean Euclidean distance between `observed` and the projections of
/// `points` (px). Throws BehindCamera.
double reprojection_error(const ProjectiveCamera<double>& camera, const Points3d& points,
                          const Points2d& observed);

/// One pass of the pipeline: observe through the true cameras, re-estimate
/// each pose from `landmarks` under the perturbed intrinsics, triangulate
/// `eval_points`, then score. Solver failures are caught and reported through
/// `ok` / `failure`. `noise` is only drawn from when pixel_noise > 0.
TrialResult run_trial(const BiplanarRigd& rig_true, const CameraIntrinsicsd& perturbed_ap,
                      const CameraIntrinsicsd& perturbed_lat, const Points3d& landmarks,
                      const Points3d& eval_points, const TrialOptions& options = {},
                      Rng* noise = nullptr);

struct CellSummary {
  GridCell cell;
  int n_trials = 0;  // attempted
  int n_failed = 0;
  double recon_rmse_mean = 0.0;
  double recon_rmse_std = 0.0;
  double reproj_ap_mean = 0.0;
  double reproj_ap_std = 0.0;
  double reproj_lat_mean = 0.0;
  double reproj_lat_std = 0.0;
  std::vector<TrialResult> trials;  // empty when read back from a file
};

/// Per-cell statistics plus what is needed to reproduce them. Standard
/// deviations are population (divide by the successful-trial count).
struct ExperimentReport {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string config_json;  // canonical config, compact
  std::vector<std::string> notes;
  bool partial = false;  // some cell lost more than 10% of its trials
  std::vector<CellSummary> cells;
};

struct PointSets {
  Points3d eval_points;
  Points3d landmarks;
};

/// Evaluation points and landmarks for one trial. With resample_per_trial
/// off, `cell` and `trial` are ignored and every trial shares one set.
PointSets prepare_points(const ExperimentConfig& config, const BiplanarRigd& rig,
                         std::uint64_t cell = 0, std::uint64_t trial = 0);

struct RunOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool keep_trials = true;
};

/// Every grid cell x trials_per_cell. Trial (c, k) draws from the substream
/// keyed by (seed, c, k), and results are merged in (cell, trial) order, so
/// the report does not depend on the thread count.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Recomputes the summary statistics of `cell` from `trials`.
void summarize(CellSummary& cell, const std::vector<TrialResult>& trials);

}  // namespace carmtol
