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

#include "carmtol/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "text_position.hpp"

namespace carmtol {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_number(double v) { return std::isfinite(v) ? number(v) : "null"; }

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::vector<std::string> row_values(const CellSummary& c, bool for_json) {
  auto num = for_json ? json_number : number;
  return {num(c.cell.pp_level),      num(c.cell.focal_level),  std::to_string(c.n_trials),
          std::to_string(c.n_failed), num(c.recon_rmse_mean),  num(c.recon_rmse_std),
          num(c.reproj_ap_mean),      num(c.reproj_ap_std),    num(c.reproj_lat_mean),
          num(c.reproj_lat_std)};
}

}  // namespace

std::string format_report_csv(const ExperimentReport& report) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kReportColumns); ++i) {
    if (i) out += ",";
    out += kReportColumns[i];
  }
  out += "\n";
  for (const auto& cell : report.cells) {
    const auto values = row_values(cell, false);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ",";
      out += values[i];
    }
    out += "\n";
  }
  return out;
}

std::string format_report_json(const ExperimentReport& report) {
  std::string out = "{\n";
  out += "  \"schema_version\": " + std::to_string(kReportSchemaVersion) + ",\n";
  out += "  \"provenance\": {\n";
  out += "    \"seed\": " + std::to_string(report.seed) + ",\n";
  out += "    \"config_digest\": " + json_string(report.config_digest) + ",\n";
  out += "    \"config\": " + (report.config_json.empty() ? std::string("null") : report.config_json) + ",\n";
  out += "    \"std_estimator\": \"population\",\n";
  out += "    \"notes\": [";
  for (std::size_t i = 0; i < report.notes.size(); ++i) {
    out += (i ? ", " : "") + json_string(report.notes[i]);
  }
  out += "]\n  },\n";
  out += std::string("  \"partial\": ") + (report.partial ? "true" : "false") + ",\n";
  out += "  \"cells\": [";
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    out += c ? ",\n    {" : "\n    {";
    const auto values = row_values(report.cells[c], true);
    for (std::size_t i = 0; i < values.size(); ++i) {
      out += (i ? ", \"" : "\"") + std::string(kReportColumns[i]) + "\": " + values[i];
    }
    out += "}";
  }
  out += report.cells.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

void write_report(const ExperimentReport& report, ReportFormat format, const std::filesystem::path& path) {
  const std::string text = format == ReportFormat::csv ? format_report_csv(report) : format_report_json(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

ExperimentReport parse_report_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& ex) {
    const auto [line, column] = detail::line_and_column(text, ex.byte);
    throw ParseError(std::string("report parse error: ") + ex.what(), line, column);
  }
  try {
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw ValidationError({"schema_version: unsupported report version"});
    }
    ExperimentReport report;
    const auto& prov = doc.at("provenance");
    report.seed = prov.at("seed").get<std::uint64_t>();
    report.config_digest = prov.at("config_digest").get<std::string>();
    if (!prov.at("config").is_null()) report.config_json = prov.at("config").dump();
    report.notes = prov.at("notes").get<std::vector<std::string>>();
    report.partial = doc.at("partial").get<bool>();
    auto num = [](const json& v) {
      return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    for (const auto& row : doc.at("cells")) {
      CellSummary c;
      c.cell = {num(row.at("focal_level_px")), num(row.at("pp_level_px"))};
      c.n_trials = row.at("n_trials").get<int>();
      c.n_failed = row.at("n_failed").get<int>();
      c.recon_rmse_mean = num(row.at("recon_rmse_mean_mm"));
      c.recon_rmse_std = num(row.at("recon_rmse_std_mm"));
      c.reproj_ap_mean = num(row.at("reproj_ap_mean_px"));
      c.reproj_ap_std = num(row.at("reproj_ap_std_px"));
      c.reproj_lat_mean = num(row.at("reproj_lat_mean_px"));
      c.reproj_lat_std = num(row.at("reproj_lat_std_px"));
      report.cells.push_back(std::move(c));
    }
    return report;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError({std::string("report: ") + ex.what()});
  }
}

std::vector<CellSummary> parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty report", 1, 1);
  std::string expected;
  for (std::size_t i = 0; i < std::size(kReportColumns); ++i) {
    expected += (i ? "," : "") + std::string(kReportColumns[i]);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw ParseError("unexpected report header", 1, 1);

  std::vector<CellSummary> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> v;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      char* end = nullptr;
      const double d = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size()) {
        throw ParseError("bad number '" + field + "'", line_no, v.size() + 1);
      }
      v.push_back(d);
    }
    if (v.size() != std::size(kReportColumns)) {
      throw ParseError("expected " + std::to_string(std::size(kReportColumns)) + " fields", line_no, 1);
    }
    CellSummary c;
    c.cell = {v[1], v[0]};
    c.n_trials = static_cast<int>(v[2]);
    c.n_failed = static_cast<int>(v[3]);
    c.recon_rmse_mean = v[4];
    c.recon_rmse_std = v[5];
    c.reproj_ap_mean = v[6];
    c.reproj_ap_std = v[7];
    c.reproj_lat_mean = v[8];
    c.reproj_lat_std = v[9];
    cells.push_back(c);
  }
  return cells;
}

}  // namespace carmtol
