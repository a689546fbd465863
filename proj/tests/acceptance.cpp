// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Study configs are read from OPTBENCH_CONFIG_DIR (environment first, then the
// compile-time default). Results go to a scratch directory under the system
// temp dir, which is removed afterwards.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optbench/harness.hpp"
#include "optbench/report.hpp"
#include "optbench/search.hpp"
#include "optbench/stats.hpp"
#include "optbench/study.hpp"
#include "optbench/taxonomy.hpp"
#include "optbench/workloads.hpp"

using namespace optbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++g_failures;
  std::printf("%s criterion %d: %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs,
              o.detail.empty() ? "" : " -- ", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path config_dir() {
  if (const char* env = std::getenv("OPTBENCH_CONFIG_DIR")) return env;
  return OPTBENCH_CONFIG_DIR;
}

fs::path scratch() {
  static const fs::path p = fs::temp_directory_path() / "optbench_acceptance";
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double min_of(const std::vector<double>& pool, std::span<const std::size_t> idx) {
  double m = 1e300;
  for (auto i : idx) m = std::min(m, pool[i]);
  return m;
}

std::vector<double> uniform_pool(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

const Band* final_val_band(const OptimizerResult& o) {
  for (const auto& s : o.statistics)
    if (s.spec.to_string() == "final_val_error" && s.summary.band) return &*s.summary.band;
  return nullptr;
}

const OptimizerResult* by_rule(const StudyResult& r, Rule rule) {
  for (std::size_t i = 0; i < r.optimizers.size(); ++i)
    if (r.config.optimizers[i].space.rule == rule && !r.optimizers[i].aborted) return &r.optimizers[i];
  return nullptr;
}

// Studies shared between criteria 6, 7 and 9.
std::optional<StudyResult> g_desk, g_noisy;

StudyResult run_into(const std::string& config, const std::string& dir, int parallelism) {
  const auto cfg = load_study_config((config_dir() / config).string());
  fs::remove_all(scratch() / dir);
  return run_study(cfg, {parallelism, scratch() / dir, {}});
}

std::string ranking_line(const StudyResult& r) {
  std::istringstream in(render_table(r));
  for (std::string line; std::getline(in, line);)
    if (line.rfind("ranking:", 0) == 0) return line;
  return {};
}

Outcome exact_inclusions(const std::vector<InclusionCheck>& checks) {
  Outcome o{true, {}};
  double worst = 0;
  for (const auto& c : checks) {
    if (!c.pair.exact) continue;
    o.pass = o.pass && c.pass && c.workloads.size() == std::size(kAllWorkloadKinds);
    for (const auto& w : c.workloads) {
      worst = std::max(worst, w.rel_deviations.back());
      // SGD as a zero-momentum special case must match bit for bit.
      if (c.pair.special == Rule::SGD && w.abs_deviation != 0.0) o.pass = false;
    }
  }
  o.detail = "worst relative deviation " + fmt(worst) + " over 200 steps, 4 workloads";
  return o;
}

Outcome limit_inclusions(const std::vector<InclusionCheck>& checks) {
  Outcome o{true, {}};
  for (const auto& c : checks) {
    if (c.pair.exact) continue;
    o.pass = o.pass && c.pass;
    for (const auto& w : c.workloads) {
      if (w.workload != WorkloadKind::Quadratic) continue;
      o.detail += std::string(o.detail.empty() ? "" : "; ") + std::string(to_string(c.pair.general)) +
                  " at eps=1e8: " + fmt(w.rel_deviations.back());
    }
  }
  return o;
}

Outcome gradients() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<> u(-1.0, 1.0);
  double worst = 0;
  for (auto kind : kAllWorkloadKinds) {
    auto cfg = builtin_workload(kind, 3);
    cfg.l2 = 1e-3;
    const auto w = make_workload(cfg);
    for (int point = 0; point < 10; ++point) {
      std::vector<double> theta(w->param_count());
      for (auto& x : theta) x = u(rng);
      for (bool batch : {false, true}) {
        if (batch && !w->is_classifier()) continue;
        auto f = [&](const std::vector<double>& x) {
          return batch ? w->loss_and_grad(x, point, 5).loss : w->full_loss_and_grad(x).loss;
        };
        const auto g = batch ? w->loss_and_grad(theta, point, 5).grad.values
                             : w->full_loss_and_grad(theta).grad.values;
        double err = 0, scale = 0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
          auto x = theta;
          const double h = 1e-5;
          x[i] = theta[i] + h;
          const double up = f(x);
          x[i] = theta[i] - h;
          const double fd = (up - f(x)) / (2 * h);
          err = std::max(err, std::abs(fd - g[i]));
          scale = std::max(scale, std::abs(g[i]));
        }
        worst = std::max(worst, err / scale);
      }
    }
  }
  return {worst <= 1e-5, "worst relative error " + fmt(worst)};
}

Outcome bootstrap_oracle() {
  bool ordered = true;
  double avg = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pool = uniform_pool(50, seed);
    const auto s = bootstrap(50, {10, 50, 100, seed + 1000},
                             [&](std::span<const std::size_t> idx) -> std::optional<double> {
                               return min_of(pool, idx);
                             });
    if (!s.band) return {false, "statistic undefined"};
    ordered = ordered && s.band->p5 <= s.band->mean && s.band->mean <= s.band->p95;
    avg += s.band->mean / 20;
  }
  const bool close = std::abs(avg - 1.0 / 11.0) <= 0.02;
  return {close && ordered, "mean " + fmt(avg) + " vs 1/11 = " + fmt(1.0 / 11.0) +
                                (ordered ? "" : ", band ordering violated")};
}

Outcome curve_shape() {
  const std::vector<std::int64_t> budgets{1, 2, 4, 8, 16};
  std::vector<double> avg(budgets.size());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pool = uniform_pool(50, seed);
    const auto curve = best_so_far_curve(
        50, {16, 50, 100, seed},
        [&](std::span<const std::size_t> idx) -> std::optional<double> { return min_of(pool, idx); },
        budgets);
    for (std::size_t i = 0; i < curve.size(); ++i) avg[i] += curve[i].second.band->mean / 20;
  }
  Outcome o{true, "k:mean"};
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    o.pass = o.pass && std::abs(avg[i] - 1.0 / (static_cast<double>(budgets[i]) + 1)) <= 0.05;
    o.detail += " " + std::to_string(budgets[i]) + ":" + fmt(avg[i]);
  }
  return o;
}

Outcome desk_ordering() {
  g_desk = run_into("desk_tiny_mlp.json", "desk", 1);
  g_noisy = run_into("noisy_quadratic.json", "noisy_quadratic_p1", 1);
  Outcome o{true, {}};
  for (const auto& pair : kInclusionPairs) {
    const auto* special = by_rule(*g_desk, pair.special);
    const auto* general = by_rule(*g_desk, pair.general);
    if (!special || !general) continue;  // pair not part of the study
    const Band* s = final_val_band(*special);
    const Band* g = final_val_band(*general);
    const bool ok = s && g && g->mean <= s->mean + 0.5 * (s->p95 - s->p5);
    o.pass = o.pass && ok;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + general->name + " " +
                (g ? fmt(g->mean) : "n/a") + (ok ? " <= " : " > ") + special->name + " " +
                (s ? fmt(s->mean) + "+" + fmt(0.5 * (s->p95 - s->p5)) : "n/a");
  }
  const auto* sgd = by_rule(*g_noisy, Rule::SGD);
  const auto* mom = by_rule(*g_noisy, Rule::Momentum);
  const Band* a = sgd ? final_val_band(*sgd) : nullptr;
  const Band* b = mom ? final_val_band(*mom) : nullptr;
  const bool ok = a && b && b->mean <= a->mean;
  o.pass = o.pass && ok && g_noisy->config.workload.condition_number >= 100;
  o.detail += "; noisy quadratic: momentum " + (b ? fmt(b->mean) : "n/a") + (ok ? " <= " : " > ") +
              "sgd " + (a ? fmt(a->mean) : "n/a");
  return o;
}

Outcome protocol_sensitivity() {
  if (!g_noisy) g_noisy = run_into("noisy_quadratic.json", "noisy_quadratic_p1", 1);
  const Band* mom = final_val_band(g_noisy->optimizer("momentum"));
  const Band* restricted = final_val_band(g_noisy->optimizer("adam_restricted"));
  const Band* full = final_val_band(g_noisy->optimizer("adam"));
  if (!mom || !restricted || !full) return {false, "missing statistic"};
  const bool underperforms = restricted->mean > mom->mean;
  const bool no_worse = full->mean <= restricted->mean;
  const bool gap_shrinks = std::abs(full->mean - mom->mean) <= std::abs(restricted->mean - mom->mean);
  const auto ranking = ranking_line(*g_noisy);
  return {underperforms && no_worse && gap_shrinks && !ranking.empty(),
          "momentum " + fmt(mom->mean) + ", restricted adam " + fmt(restricted->mean) +
              ", full adam " + fmt(full->mean) + "; " + ranking};
}

Outcome sampler() {
  const int n = 1024;
  const std::size_t k = 8;
  std::vector<std::vector<double>> cols(k);
  for (int i = 0; i < n; ++i) {
    const auto u = sample_unit(k, i, 17);
    for (std::size_t a = 0; a < k; ++a) cols[a].push_back(u[a]);
  }
  double worst = 0;
  for (auto& c : cols) {
    std::sort(c.begin(), c.end());
    for (int i = 0; i < n; ++i)
      worst = std::max({worst, std::abs(c[i] - static_cast<double>(i) / n),
                        std::abs(c[i] - static_cast<double>(i + 1) / n)});
  }
  const bool reference = sample_unit(1, 1, 0, SamplerMode::Reference)[0] == 0.5 &&
                         sample_unit(1, 2, 0, SamplerMode::Reference)[0] == 0.25 &&
                         sample_unit(1, 3, 0, SamplerMode::Reference)[0] == 0.75;
  return {worst <= 2.0 / std::sqrt(n) && reference,
          "worst KS over 8 axes " + fmt(worst) + " (bound " + fmt(2.0 / std::sqrt(n)) + ")" +
              (reference ? "" : ", reference sequence wrong")};
}

Outcome reproducibility() {
  Outcome o{true, {}};
  for (const std::string name : {"smoke", "noisy_quadratic"}) {
    const auto file = name + ".json";
    // The noisy quadratic study already ran at parallelism 1 for criterion 6.
    const auto seq = name == "noisy_quadratic" && g_noisy ? *g_noisy : run_into(file, name + "_p1", 1);
    const auto again = run_into(file, name + "_p1b", 1);
    const auto par = run_into(file, name + "_p8", 8);
    const auto t1 = slurp(scratch() / (name + "_p1") / kTrialsFile);
    const bool same = !t1.empty() && t1 == slurp(scratch() / (name + "_p1b") / kTrialsFile) &&
                      t1 == slurp(scratch() / (name + "_p8") / kTrialsFile) &&
                      render_csv(seq) == render_csv(again) && render_csv(seq) == render_csv(par) &&
                      render_curves_csv(seq) == render_curves_csv(par);
    o.pass = o.pass && same;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + name + (same ? " identical" : " differs");
  }
  return o;
}

}  // namespace

int main() {
  fs::remove_all(scratch());
  fs::create_directories(scratch());

  std::vector<InclusionCheck> checks;
  report(1, "exact inclusions", [&] {
    checks = check_inclusions();
    return exact_inclusions(checks);
  });
  report(2, "limit inclusions", [&] { return limit_inclusions(checks); });
  report(3, "gradients vs finite differences", gradients);
  report(4, "bootstrap oracle", bootstrap_oracle);
  report(5, "best-so-far curve shape", curve_shape);
  report(6, "desk-scale inclusion ordering", desk_ordering);
  report(7, "protocol sensitivity", protocol_sensitivity);
  report(8, "sampler quality", sampler);
  report(9, "reproducibility across reruns and parallelism", reproducibility);

  fs::remove_all(scratch());
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
