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

#include "carmtol/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "carmtol/config.hpp"
#include "carmtol/experiment.hpp"
#include "carmtol/report.hpp"
#include "carmtol/sampling.hpp"

namespace carmtol {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

int cmd_simulate(const std::string& config_arg, unsigned threads, const std::string& csv_override,
                 const std::string& json_override, std::ostream& out) {
  const ExperimentConfig config = resolve_config(config_arg);
  const ExperimentReport report = run_experiment(config, {threads, false});
  const std::string csv = csv_override.empty() ? config.output.csv : csv_override;
  const std::string json = json_override.empty() ? config.output.json : json_override;
  write_report(report, ReportFormat::csv, csv);
  write_report(report, ReportFormat::json, json);

  double worst = 0.0;
  int failed = 0;
  for (const auto& c : report.cells) {
    worst = std::max(worst, c.recon_rmse_mean);
    failed += c.n_failed;
  }
  out << "simulate: " << report.cells.size() << " cells x " << config.perturbation.trials_per_cell
      << " trials, seed " << report.seed << ", digest " << report.config_digest << "\n"
      << "  worst cell mean recon RMSE: " << fixed(worst, 4) << " mm, failed trials: " << failed
      << (report.partial ? " (PARTIAL: a cell lost >10% of trials)" : "") << "\n"
      << "  wrote " << csv << " and " << json << "\n";
  return kExitOk;
}

int cmd_sample(const std::string& config_arg, const std::string& out_path, std::ostream& out) {
  const ExperimentConfig config = resolve_config(config_arg);
  const BiplanarRigd rig = build_default_rig(config.rig);
  Points3d candidates;
  if (config.evaluation.points == PointSource::phantom) {
    candidates = phantom_points(*config.phantom, rig, config.filters);
  } else {
    Rng rng(config.seed, Stream::eval_points);
    candidates = sample_volume(config.volume, config.evaluation.sample_count, rng);
  }
  const auto scores = score_points(candidates, rig, config.filters);

  std::ostringstream csv;
  csv << "index,x_mm,y_mm,z_mm,ap_u_px,ap_v_px,lat_u_px,lat_v_px,edge_score_px,disparity_px\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    if (!s.kept) continue;
    const auto p = candidates.col(static_cast<Eigen::Index>(i));
    csv << i << ',' << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z()) << ',' << num(s.ap_pixel.x())
        << ',' << num(s.ap_pixel.y()) << ',' << num(s.lat_pixel.x()) << ',' << num(s.lat_pixel.y()) << ','
        << num(s.edge_score) << ',' << num(s.disparity) << '\n';
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + out_path + " for writing");
    f << csv.str();
  }
  return kExitOk;
}

int cmd_trial(const std::string& config_arg, double focal, double pp, std::uint64_t seed, std::ostream& out) {
  const ExperimentConfig config = resolve_config(config_arg);
  const BiplanarRigd rig = build_default_rig(config.rig);
  const PointSets sets = prepare_points(config, rig);
  Rng rng(seed, Stream::trial);
  const auto ap = perturb_intrinsics(rig.ap().intrinsics, focal, pp, config.perturbation.mode, rng);
  const auto lat = perturb_intrinsics(rig.lat().intrinsics, focal, pp, config.perturbation.mode, rng);
  Rng noise(seed, Stream::pixel_noise);
  const TrialResult r = run_trial(rig, ap.intrinsics, lat.intrinsics, sets.landmarks, sets.eval_points,
                                  {config.refinement, config.evaluation.pixel_noise}, &noise);

  out << "trial: config " << config.name << ", focal level " << num(focal) << " px, pp level " << num(pp)
      << " px, mode " << to_string(config.perturbation.mode) << ", seed " << seed << "\n";
  out << "  points: " << sets.eval_points.cols() << " evaluated, " << sets.landmarks.cols() << " landmarks\n";
  auto view = [&](const char* name, double df, const Vector2d& dpp, bool converged) {
    out << "  " << name << ": focal delta " << fixed(df, 3) << " px (" << fixed(focal_shift_mm(df, rig.pixel_spacing()), 3)
        << " mm), pp delta (" << fixed(dpp.x(), 3) << ", " << fixed(dpp.y(), 3) << ") px, pose "
        << (converged ? "converged" : "NOT converged") << "\n";
  };
  view("AP ", r.focal_delta_ap, r.pp_delta_ap, r.converged_ap);
  view("LAT", r.focal_delta_lat, r.pp_delta_lat, r.converged_lat);
  if (!r.ok) {
    out << "  trial failed: " << r.failure << "\n";
    return kExitRuntime;
  }
  out << "  recon_rmse_mm: " << sci(r.recon_rmse) << "\n"
      << "  recon_rmse_unaligned_mm: " << sci(r.recon_rmse_unaligned) << "\n"
      << "  reproj_ap_px: " << sci(r.reproj_ap) << "\n"
      << "  reproj_lat_px: " << sci(r.reproj_lat) << "\n";
  return kExitOk;
}

int cmd_figure(const std::string& report_path, double pp, const std::string& metric, std::ostream& out,
               std::ostream& err) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw IoError("cannot read report " + report_path);
  std::ostringstream text;
  text << in.rdbuf();
  const auto cells = parse_report_csv(text.str());

  std::ostringstream rows;
  rows << "x,y,err\n";
  bool any = false;
  for (const auto& c : cells) {
    if (std::abs(c.cell.pp_level - pp) > 1e-9) continue;
    any = true;
    double y = c.recon_rmse_mean;
    double e = c.recon_rmse_std;
    if (metric == "reproj_ap") {
      y = c.reproj_ap_mean;
      e = c.reproj_ap_std;
    } else if (metric == "reproj_lat") {
      y = c.reproj_lat_mean;
      e = c.reproj_lat_std;
    }
    rows << num(c.cell.focal_level) << ',' << num(y) << ',' << num(e) << '\n';
  }
  if (!any) {
    err << "figure: no such pp level " << num(pp) << " in " << report_path << "\n";
    return kExitValidation;
  }
  out << rows.str();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulates how C-arm intrinsic calibration errors propagate into biplanar 3D reconstruction",
               "carmtol"};
  app.require_subcommand(1);

  std::string config_arg;
  unsigned threads = 0;
  std::string csv_path;
  std::string json_path;
  auto* simulate = app.add_subcommand("simulate", "Run the full perturbation grid and write CSV/JSON reports");
  simulate->add_option("config", config_arg, "Config file or bundled name (sim_default, phantom_default)")
      ->required();
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  simulate->add_option("--csv", csv_path, "Override the CSV report path");
  simulate->add_option("--json", json_path, "Override the JSON report path");

  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Emit the filtered evaluation points with per-view diagnostics");
  sample->add_option("config", config_arg, "Config file or bundled name")->required();
  sample->add_option("--out", sample_out, "Write CSV here instead of stdout");

  double focal = 0.0;
  double pp = 0.0;
  std::uint64_t seed = 0;
  auto* trial = app.add_subcommand("trial", "Run a single trial and print a breakdown");
  trial->add_option("config", config_arg, "Config file or bundled name")->required();
  trial->add_option("--focal", focal, "Focal perturbation level, px")->required();
  trial->add_option("--pp", pp, "Principal-point perturbation level, px")->required();
  trial->add_option("--seed", seed, "Seed for the perturbation draw")->required();

  std::string report_path;
  std::string metric = "recon";
  auto* figure = app.add_subcommand("figure", "Emit x/y/err columns for one curve of a CSV report");
  figure->add_option("report", report_path, "CSV report written by simulate")->required();
  figure->add_option("--pp", pp, "Principal-point level selecting the curve, px")->required();
  figure->add_option("--metric", metric, "recon, reproj_ap or reproj_lat")
      ->check(CLI::IsMember({"recon", "reproj_ap", "reproj_lat"}));

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(config_arg, threads, csv_path, json_path, out);
    if (*sample) return cmd_sample(config_arg, sample_out, out);
    if (*trial) return cmd_trial(config_arg, focal, pp, seed, out);
    if (*figure) return cmd_figure(report_path, pp, metric, out, err);
  } catch (const ConfigError& e) {
    err << "invalid config:\n" << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidPerturbation& e) {
    err << "invalid perturbation: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace carmtol
