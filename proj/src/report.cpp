// SPDX-License-Identifier: Apache-2.0
#include "optbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "optbench/errors.hpp"
#include "optbench/numfmt.hpp"

namespace optbench {

namespace {

std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string opt_number(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const char* kCsvHeader = "optimizer,statistic,mean,p5,p95,defined_fraction,n_feasible,n_infeasible";

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "svg") return ReportFormat::Svg;
  throw UsageError("unknown report format '" + std::string(name) + "'");
}

std::vector<ReportRow> report_rows(const StudyResult& result) {
  std::vector<ReportRow> rows;
  for (const auto& opt : result.optimizers) {
    for (const auto& s : opt.statistics) {
      ReportRow row;
      row.optimizer = opt.name;
      row.statistic = s.spec.to_string();
      if (s.summary.band) {
        row.mean = s.summary.band->mean;
        row.p5 = s.summary.band->p5;
        row.p95 = s.summary.band->p95;
      }
      row.defined_fraction = s.summary.defined_fraction;
      row.n_feasible = static_cast<std::int64_t>(opt.pool.size());
      row.n_infeasible = opt.n_infeasible;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string render_csv(const StudyResult& result) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : report_rows(result)) {
    out << r.optimizer << ',' << r.statistic << ',' << opt_number(r.mean) << ','
        << opt_number(r.p5) << ',' << opt_number(r.p95) << ',' << format_double(r.defined_fraction)
        << ',' << r.n_feasible << ',' << r.n_infeasible << '\n';
  }
  return out.str();
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
  std::vector<ReportRow> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError("report CSV: bad header");
  auto opt = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return parse_double(s);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw ConfigError("report CSV: expected 8 fields in '" + line + "'");
    ReportRow r{f[0], f[1], opt(f[2]), opt(f[3]), opt(f[4]), parse_double(f[5]),
                static_cast<std::int64_t>(parse_double(f[6])),
                static_cast<std::int64_t>(parse_double(f[7]))};
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_curves_csv(const StudyResult& result) {
  std::ostringstream out;
  out << "optimizer,statistic,budget,mean,p5,p95,defined_fraction\n";
  for (const auto& opt : result.optimizers) {
    for (const auto& s : opt.statistics) {
      for (const auto& [k, summary] : s.curve) {
        out << opt.name << ',' << s.spec.to_string() << ',' << k << ',';
        if (summary.band) {
          out << format_double(summary.band->mean) << ',' << format_double(summary.band->p5) << ','
              << format_double(summary.band->p95);
        } else {
          out << ",,";
        }
        out << ',' << format_double(summary.defined_fraction) << '\n';
      }
    }
  }
  return out.str();
}

std::string render_table(const StudyResult& result) {
  std::ostringstream out;
  const auto& cfg = result.config;
  out << "study " << cfg.name << " [" << result.config_hash << "]  workload "
      << to_string(cfg.workload.kind) << ", " << cfg.budget_steps << " steps, selecting on "
      << cfg.objective.to_string() << '\n';

  std::size_t name_w = 9;
  for (const auto& o : result.optimizers) name_w = std::max(name_w, o.name.size() + 2);

  for (std::size_t si = 0; si < cfg.statistics.size(); ++si) {
    const auto stat_name = cfg.statistics[si].to_string();
    out << '\n' << stat_name << '\n';
    out << pad("optimizer", name_w) << pad("mean", 12) << pad("[p5, p95]", 24)
        << pad("defined", 9) << pad("feasible", 10) << "infeasible\n";
    struct Ranked {
      std::string name;
      Band band;
    };
    std::vector<Ranked> ranked;
    for (const auto& o : result.optimizers) {
      out << pad(o.name, name_w);
      if (o.aborted) {
        out << "aborted: " << o.diagnostic << '\n';
        continue;
      }
      const auto& s = o.statistics[si].summary;
      if (s.band) {
        out << pad(fixed(s.band->mean), 12)
            << pad("[" + fixed(s.band->p5) + ", " + fixed(s.band->p95) + "]", 24);
        ranked.push_back({o.name, *s.band});
      } else {
        out << pad("unattained", 12) << pad("", 24);
      }
      out << pad(fixed(s.defined_fraction, 3), 9) << pad(std::to_string(o.pool.size()), 10)
          << o.n_infeasible << '\n';
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Ranked& a, const Ranked& b) { return a.band.mean < b.band.mean; });
    if (!ranked.empty()) {
      // '~' joins neighbours whose [p5, p95] bands overlap.
      out << "ranking: " << ranked[0].name;
      for (std::size_t i = 1; i < ranked.size(); ++i) {
        const bool overlap = ranked[i].band.p5 <= ranked[i - 1].band.p95;
        out << (overlap ? " ~ " : " < ") << ranked[i].name;
      }
      out << '\n';
    }
  }

  bool any_warning = false;
  for (const auto& o : result.optimizers) {
    for (const auto& [axis, side] : o.boundary) {
      if (!any_warning) out << "\nboundary warnings (best trial near the search-space edge):\n";
      any_warning = true;
      out << "  " << o.name << ": " << axis << " near " << (side == BoundarySide::Low ? "low" : "high")
          << " end (trial " << o.best_trial.value_or(-1) << ")\n";
    }
  }
  return out.str();
}

std::string render_svg(const StudyResult& result) {
  const auto& stats = result.config.statistics;
  const int panel_w = 120 + 70 * static_cast<int>(result.optimizers.size());
  const int panel_h = 260;
  const int width = panel_w;
  const int height = panel_h * static_cast<int>(std::max<std::size_t>(stats.size(), 1)) + 20;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t si = 0; si < stats.size(); ++si) {
    const int top = 20 + static_cast<int>(si) * panel_h;
    const int plot_top = top + 25, plot_bottom = top + panel_h - 50, left = 70;
    double hi = 0.0;
    for (const auto& o : result.optimizers) {
      if (o.aborted || !o.statistics[si].summary.band) continue;
      hi = std::max(hi, o.statistics[si].summary.band->p95);
    }
    if (!(hi > 0.0)) hi = 1.0;
    hi *= 1.1;
    auto y_of = [&](double v) {
      return plot_bottom - (plot_bottom - plot_top) * std::clamp(v / hi, 0.0, 1.0);
    };
    out << "<text x=\"" << left << "\" y=\"" << top + 12 << "\" font-size=\"13\">"
        << stats[si].to_string() << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << plot_top << "\" x2=\"" << left << "\" y2=\""
        << plot_bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << plot_bottom << "\" x2=\"" << panel_w - 20
        << "\" y2=\"" << plot_bottom << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const double v = hi * tick / 4.0;
      out << "<text x=\"" << left - 5 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">"
          << fixed(v, 3) << "</text>\n";
    }
    for (std::size_t oi = 0; oi < result.optimizers.size(); ++oi) {
      const auto& o = result.optimizers[oi];
      const int cx = left + 45 + 70 * static_cast<int>(oi);
      out << "<text x=\"" << cx << "\" y=\"" << plot_bottom + 16 << "\" text-anchor=\"middle\">"
          << o.name << "</text>\n";
      if (o.aborted || !o.statistics[si].summary.band) continue;
      const auto& b = *o.statistics[si].summary.band;
      const double y = y_of(b.mean);
      out << "<rect x=\"" << cx - 20 << "\" y=\"" << y << "\" width=\"40\" height=\""
          << plot_bottom - y << "\" fill=\"#6a8fc7\"/>\n";
      out << "<line x1=\"" << cx << "\" y1=\"" << y_of(b.p5) << "\" x2=\"" << cx << "\" y2=\""
          << y_of(b.p95) << "\" stroke=\"black\"/>\n";
      for (double v : {b.p5, b.p95}) {
        out << "<line x1=\"" << cx - 8 << "\" y1=\"" << y_of(v) << "\" x2=\"" << cx + 8
            << "\" y2=\"" << y_of(v) << "\" stroke=\"black\"/>\n";
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string render(const StudyResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table: return render_table(result);
    case ReportFormat::Csv: return render_csv(result);
    case ReportFormat::Svg: return render_svg(result);
  }
  return {};
}

std::string render_inclusion_table(const std::vector<InclusionCheck>& checks) {
  std::ostringstream out;
  out << pad("inclusion", 22) << pad("kind", 7);
  for (auto k : kAllWorkloadKinds) out << pad(std::string(to_string(k)), 22);
  out << "result\n";
  for (const auto& c : checks) {
    out << pad(std::string(to_string(c.pair.special)) + " <= " + std::string(to_string(c.pair.general)), 22)
        << pad(c.pair.exact ? "exact" : "limit", 7);
    for (const auto& w : c.workloads) {
      std::string cell = w.rel_deviations.empty() ? "-" : fixed(w.rel_deviations.back(), 3);
      if (!w.pass) cell += " FAIL";
      out << pad(cell, 22);
    }
    out << (c.pass ? "pass" : "FAIL") << '\n';
  }
  return out.str();
}

}  // namespace optbench
