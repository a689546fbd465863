// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optbench/harness.hpp"
#include "optbench/taxonomy.hpp"

namespace optbench {

enum class ReportFormat { Table, Csv, Svg };
ReportFormat parse_report_format(std::string_view name);

/// Comparison table (mean [p5, p95] per optimizer and statistic), a ranking
/// line per statistic, and boundary warnings.
std::string render_table(const StudyResult& result);

/// Header: optimizer,statistic,mean,p5,p95,defined_fraction,n_feasible,n_infeasible
/// Numbers use the shortest round-tripping decimal form; an unattained
/// statistic leaves mean/p5/p95 empty.
std::string render_csv(const StudyResult& result);

/// optimizer,statistic,budget,mean,p5,p95,defined_fraction
std::string render_curves_csv(const StudyResult& result);

/// Standalone SVG: one bar chart per statistic, bars at the bootstrap mean
/// with p5/p95 whiskers.
std::string render_svg(const StudyResult& result);

std::string render(const StudyResult& result, ReportFormat format);

struct ReportRow {
  std::string optimizer;
  std::string statistic;
  std::optional<double> mean, p5, p95;
  double defined_fraction = 0.0;
  std::int64_t n_feasible = 0;
  std::int64_t n_infeasible = 0;

  bool operator==(const ReportRow&) const = default;
};

std::vector<ReportRow> report_rows(const StudyResult& result);
std::vector<ReportRow> parse_report_csv(std::string_view csv);

/// Fixed-width pass/fail table for check_inclusions output.
std::string render_inclusion_table(const std::vector<InclusionCheck>& checks);

}  // namespace optbench
