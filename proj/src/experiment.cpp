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

#include "carmtol/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "carmtol/procrustes.hpp"
#include "carmtol/sampling.hpp"
#include "carmtol/triangulation.hpp"

namespace carmtol {

double recon_error_rmse(const Points3d& reconstructed, const Points3d& ground_truth) {
  return procrustes_rigid(reconstructed, ground_truth).rmse;
}

double reprojection_error(const ProjectiveCamera<double>& camera, const Points3d& points,
                          const Points2d& observed) {
  if (points.cols() != observed.cols() || points.cols() < 1) {
    throw DegenerateConfiguration("reprojection error needs matching, non-empty point sets");
  }
  return (project(camera, points) - observed).colwise().norm().mean();
}

namespace {

Points2d observe(const ProjectiveCamera<double>& camera, const Points3d& points, double noise_sigma,
                 Rng* noise) {
  Points2d pixels = project(camera, points);
  if (noise_sigma > 0.0 && noise != nullptr) {
    for (Eigen::Index i = 0; i < pixels.cols(); ++i) {
      pixels(0, i) += noise_sigma * noise->normal();
      pixels(1, i) += noise_sigma * noise->normal();
    }
  }
  return pixels;
}

}  // namespace

TrialResult run_trial(const BiplanarRigd& rig_true, const CameraIntrinsicsd& perturbed_ap,
                      const CameraIntrinsicsd& perturbed_lat, const Points3d& landmarks,
                      const Points3d& eval_points, const TrialOptions& options, Rng* noise) {
  TrialResult result;
  const auto& truth_ap = rig_true.ap().intrinsics;
  const auto& truth_lat = rig_true.lat().intrinsics;
  result.focal_delta_ap = perturbed_ap.fx() - truth_ap.fx();
  result.focal_delta_lat = perturbed_lat.fx() - truth_lat.fx();
  result.pp_delta_ap = perturbed_ap.principal_point() - truth_ap.principal_point();
  result.pp_delta_lat = perturbed_lat.principal_point() - truth_lat.principal_point();

  try {
    const double sigma = options.pixel_noise;
    const Points2d eval_ap = observe(rig_true.ap(), eval_points, sigma, noise);
    const Points2d eval_lat = observe(rig_true.lat(), eval_points, sigma, noise);
    const Points2d lm_ap = observe(rig_true.ap(), landmarks, sigma, noise);
    const Points2d lm_lat = observe(rig_true.lat(), landmarks, sigma, noise);

    const auto pose_ap = solve_pnp(Correspondences<double>(landmarks, lm_ap), perturbed_ap, options.refine);
    const auto pose_lat = solve_pnp(Correspondences<double>(landmarks, lm_lat), perturbed_lat, options.refine);
    result.converged_ap = pose_ap.converged;
    result.converged_lat = pose_lat.converged;

    const ProjectiveCamerad cam_ap{perturbed_ap, pose_ap.pose};
    const ProjectiveCamerad cam_lat{perturbed_lat, pose_lat.pose};
    const Points3d reconstructed = triangulate_linear(cam_ap, cam_lat, eval_ap, eval_lat);

    result.recon_rmse = recon_error_rmse(reconstructed, eval_points);
    result.recon_rmse_unaligned =
        std::sqrt((reconstructed - eval_points).colwise().squaredNorm().mean());
    result.reproj_ap = reprojection_error(cam_ap, reconstructed, eval_ap);
    result.reproj_lat = reprojection_error(cam_lat, reconstructed, eval_lat);
    result.ok = std::isfinite(result.recon_rmse) && std::isfinite(result.reproj_ap) &&
                std::isfinite(result.reproj_lat);
    if (!result.ok) result.failure = "non-finite error metric";
  } catch (const Error& ex) {
    result.ok = false;
    result.failure = ex.what();
  }
  return result;
}

void summarize(CellSummary& cell, const std::vector<TrialResult>& trials) {
  cell.n_trials = static_cast<int>(trials.size());
  cell.n_failed = 0;
  double sums[3] = {0.0, 0.0, 0.0};
  int ok = 0;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++cell.n_failed;
      continue;
    }
    ++ok;
    sums[0] += t.recon_rmse;
    sums[1] += t.reproj_ap;
    sums[2] += t.reproj_lat;
  }
  if (ok == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cell.recon_rmse_mean = cell.recon_rmse_std = nan;
    cell.reproj_ap_mean = cell.reproj_ap_std = nan;
    cell.reproj_lat_mean = cell.reproj_lat_std = nan;
    return;
  }
  const double means[3] = {sums[0] / ok, sums[1] / ok, sums[2] / ok};
  double sq[3] = {0.0, 0.0, 0.0};
  for (const auto& t : trials) {
    if (!t.ok) continue;
    sq[0] += (t.recon_rmse - means[0]) * (t.recon_rmse - means[0]);
    sq[1] += (t.reproj_ap - means[1]) * (t.reproj_ap - means[1]);
    sq[2] += (t.reproj_lat - means[2]) * (t.reproj_lat - means[2]);
  }
  cell.recon_rmse_mean = means[0];
  cell.reproj_ap_mean = means[1];
  cell.reproj_lat_mean = means[2];
  cell.recon_rmse_std = std::sqrt(sq[0] / ok);
  cell.reproj_ap_std = std::sqrt(sq[1] / ok);
  cell.reproj_lat_std = std::sqrt(sq[2] / ok);
}

PointSets prepare_points(const ExperimentConfig& config, const BiplanarRigd& rig, std::uint64_t cell,
                         std::uint64_t trial) {
  const auto& e = config.evaluation;
  PointSets sets;
  const std::initializer_list<std::uint64_t> no_keys = {};
  if (e.points == PointSource::phantom) {
    if (!config.phantom) throw ValidationError({"evaluation.points: \"phantom\" requires a phantom section"});
    sets.eval_points = phantom_points(*config.phantom, rig, config.filters);
  } else {
    Rng rng = e.resample_per_trial ? Rng(config.seed, Stream::eval_points, {cell, trial})
                                   : Rng(config.seed, Stream::eval_points, no_keys);
    sets.eval_points = filter_points(sample_volume(config.volume, e.sample_count, rng), rig, config.filters);
  }
  if (e.landmarks == LandmarkPolicy::shared) {
    sets.landmarks = sets.eval_points;
  } else {
    Rng rng = e.resample_per_trial ? Rng(config.seed, Stream::landmarks, {cell, trial})
                                   : Rng(config.seed, Stream::landmarks, no_keys);
    sets.landmarks =
        filter_points(sample_volume(config.volume, e.landmark_sample_count, rng), rig, config.filters);
  }
  if (sets.eval_points.cols() < 4 || sets.landmarks.cols() < 4) {
    throw DegenerateConfiguration("fewer than 4 points survive the visibility filters");
  }
  return sets;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const BiplanarRigd rig = build_default_rig(config.rig);
  config.perturbation.validate();
  const std::vector<GridCell> cells = grid(config.perturbation);
  const int trials = config.perturbation.trials_per_cell;
  const bool shared_points = !config.evaluation.resample_per_trial;
  const PointSets fixed = shared_points ? prepare_points(config, rig) : PointSets{};

  const TrialOptions trial_options{config.refinement, config.evaluation.pixel_noise};
  const std::size_t total = cells.size() * static_cast<std::size_t>(trials);
  std::vector<TrialResult> results(total);

  auto run_one = [&](std::size_t index) {
    const std::size_t c = index / static_cast<std::size_t>(trials);
    const std::size_t k = index % static_cast<std::size_t>(trials);
    TrialResult& out = results[index];
    try {
      const PointSets local = shared_points ? PointSets{} : prepare_points(config, rig, c, k);
      const PointSets& sets = shared_points ? fixed : local;
      Rng rng(config.seed, Stream::trial, {c, k});
      const auto ap = perturb_intrinsics(rig.ap().intrinsics, cells[c].focal_level, cells[c].pp_level,
                                         config.perturbation.mode, rng);
      const auto lat = perturb_intrinsics(rig.lat().intrinsics, cells[c].focal_level, cells[c].pp_level,
                                          config.perturbation.mode, rng);
      Rng noise(config.seed, Stream::pixel_noise, {c, k});
      out = run_trial(rig, ap.intrinsics, lat.intrinsics, sets.landmarks, sets.eval_points, trial_options,
                      &noise);
    } catch (const Error& ex) {
      out = TrialResult{};
      out.failure = ex.what();
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) run_one(i);
      });
    }
  }

  ExperimentReport report;
  report.seed = config.seed;
  report.config_digest = config_digest(config);
  report.config_json = config_to_json(config);
  report.notes.push_back("std is the population standard deviation over successful trials");
  if (config.evaluation.points == PointSource::phantom) {
    report.notes.push_back(
        "phantom mode is simulated: physical-device accuracy cannot be reproduced without the hardware");
  }
  report.cells.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellSummary summary;
    summary.cell = cells[c];
    std::vector<TrialResult> cell_trials(results.begin() + static_cast<std::ptrdiff_t>(c * trials),
                                         results.begin() + static_cast<std::ptrdiff_t>((c + 1) * trials));
    summarize(summary, cell_trials);
    if (summary.n_failed * 10 > summary.n_trials) report.partial = true;
    if (options.keep_trials) summary.trials = std::move(cell_trials);
    report.cells.push_back(std::move(summary));
  }
  return report;
}

}  // namespace carmtol
