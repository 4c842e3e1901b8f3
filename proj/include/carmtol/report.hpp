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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "carmtol/experiment.hpp"

namespace carmtol {

inline constexpr int kReportSchemaVersion = 1;

enum class ReportFormat { csv, json };

/// Column order of the CSV report (and the key order of each JSON cell).
inline constexpr std::string_view kReportColumns[] = {
    "pp_level_px",        "focal_level_px",    "n_trials",           "n_failed",
    "recon_rmse_mean_mm", "recon_rmse_std_mm", "reproj_ap_mean_px",  "reproj_ap_std_px",
    "reproj_lat_mean_px", "reproj_lat_std_px"};

/// Numbers are written with 17 significant digits so they parse back to the
/// same double.
std::string format_report_csv(const ExperimentReport& report);
std::string format_report_json(const ExperimentReport& report);

/// Throws IoError.
void write_report(const ExperimentReport& report, ReportFormat format, const std::filesystem::path& path);

/// Reads back a JSON report (per-trial data is not stored). Throws ParseError
/// or ValidationError.
ExperimentReport parse_report_json(std::string_view text);

/// Reads back the cell rows of a CSV report. Throws ParseError on a bad
/// header or row.
std::vector<CellSummary> parse_report_csv(std::string_view text);

}  // namespace carmtol
