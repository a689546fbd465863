// SPDX-License-Identifier: Apache-2.0
//
// optbench run <study-config> [--out DIR] [--parallelism P] [--seed S]
// optbench report <results-dir> [--format table|csv|svg] [--out FILE]
// optbench taxonomy-check [--steps N] [--eps-ladder 1e2,1e4,...]
// optbench sample --space <file> --n <k> [--seed S]
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "optbench/errors.hpp"
#include "optbench/harness.hpp"
#include "optbench/numfmt.hpp"
#include "optbench/report.hpp"
#include "optbench/search.hpp"
#include "optbench/study.hpp"
#include "optbench/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace optbench;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_reports(const StudyResult& result, const fs::path& dir) {
  write_file(dir / "report.csv", render_csv(result));
  write_file(dir / "curves.csv", render_curves_csv(result));
  write_file(dir / "report.svg", render_svg(result));
  write_file(dir / "report.txt", render_table(result));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimizer inclusion checks and tuning-protocol benchmarks"};
  app.require_subcommand(1);

  int parallelism = 1;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run a tuning study");
  std::string study_path;
  std::string out_dir;
  bool quiet = false;
  run->add_option("study-config", study_path, "Study config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Results directory (default: results/<study name>)");
  run->add_option("--parallelism", parallelism, "Concurrent trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the search and batch seeds");
  run->add_flag("--quiet", quiet, "No per-trial progress");

  auto* report = app.add_subcommand("report", "Render statistics from a results directory");
  std::string results_path;
  std::string format = "table";
  std::string report_out;
  report->add_option("results-path", results_path, "Results directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", format, "table, csv or svg")
      ->check(CLI::IsMember({"table", "csv", "svg"}));
  report->add_option("--out", report_out, "Write to a file instead of stdout");

  auto* taxo = app.add_subcommand("taxonomy-check", "Verify the six inclusion mappings numerically");
  InclusionCheckOptions check_opts;
  std::optional<std::int64_t> steps;
  std::vector<double> ladder;
  taxo->add_option("--steps", steps, "Steps per trajectory (exact and limit pairs)")->check(CLI::PositiveNumber);
  taxo->add_option("--eps-ladder", ladder, "Epsilon values for the limit pairs")->delimiter(',');
  taxo->add_option("--seed", seed, "Workload and batch seed");

  auto* sample = app.add_subcommand("sample", "Dry-run: decode the first n points of a search space");
  std::string space_path;
  std::int64_t n_points = 8;
  std::int64_t horizon = 1000;
  sample->add_option("--space", space_path, "Optimizer entry (JSON)")->required()->check(CLI::ExistingFile);
  sample->add_option("--n", n_points, "Number of points")->check(CLI::PositiveNumber);
  sample->add_option("--budget-steps", horizon, "Schedule horizon used for the printed schedule");
  sample->add_option("--seed", seed, "Sampler seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto config = load_study_config(study_path);
      if (seed) {
        config.seeds.search = *seed;
        config.seeds.batch = *seed;
      }
      const fs::path dir = out_dir.empty() ? fs::path("results") / config.name : fs::path(out_dir);
      RunOptions opts;
      opts.parallelism = parallelism;
      opts.out_dir = dir;
      if (!quiet) {
        opts.on_record = [](const TrialRecord& r) {
          std::cerr << r.optimizer << " trial " << r.trial_index << ": "
                    << (r.feasible ? "feasible" : "infeasible");
          if (r.feasible) std::cerr << " val_error=" << r.final.at(Split::Validation).error;
          std::cerr << '\n';
        };
      }
      const auto result = run_study(config, opts);
      write_reports(result, dir);
      std::cout << render_table(result) << "\nresults in " << dir.string() << '\n';
      return 0;
    }
    if (*report) {
      const auto result = load_result(results_path);
      const auto text = render(result, parse_report_format(format));
      if (report_out.empty()) {
        std::cout << text;
      } else {
        write_file(report_out, text);
      }
      return 0;
    }
    if (*taxo) {
      if (steps) {
        check_opts.exact_steps = *steps;
        check_opts.limit_steps = *steps;
      }
      if (!ladder.empty()) check_opts.eps_ladder = ladder;
      if (seed) check_opts.seed = *seed;
      const auto checks = check_inclusions(check_opts);
      std::cout << render_inclusion_table(checks);
      bool ok = true;
      for (const auto& c : checks) ok = ok && c.pass;
      for (const auto& c : checks) {
        for (const auto& w : c.workloads) {
          if (!w.note.empty()) {
            std::cout << "  " << to_string(c.pair.special) << " <= " << to_string(c.pair.general)
                      << " on " << to_string(w.workload) << ": " << w.note << '\n';
          }
        }
      }
      return ok ? 0 : 1;
    }
    if (*sample) {
      const auto entry = parse_optimizer_entry(read_file(space_path));
      const std::uint64_t s = seed.value_or(0);
      for (std::int64_t i = 0; i < n_points; ++i) {
        const auto point = decode(entry.space, sample_unit(entry.space, i, s), i);
        std::cout << "trial " << i << ":";
        for (const auto& [k, v] : point.decoded) std::cout << ' ' << k << '=' << format_double(v);
        if (point.valid) {
          const auto st = settings_for(entry.space, point, horizon);
          std::cout << "  -> " << st.optimizer.to_string() << ' ' << st.schedule.to_string();
        } else {
          std::cout << "  -> invalid: " << point.invalid_reason;
        }
        std::cout << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
