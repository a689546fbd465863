// SPDX-License-Identifier: Apache-2.0
#include "optbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "optbench/errors.hpp"
#include "optbench/numfmt.hpp"
#include "optbench/seeding.hpp"

namespace optbench {

std::string MetricSelector::to_string() const {
  return std::string(optbench::to_string(split)) +
         (field == MetricField::Loss ? "_loss" : "_error");
}

MetricSelector MetricSelector::parse(std::string_view text) {
  const auto us = text.rfind('_');
  if (us == std::string_view::npos) throw ConfigError("bad metric '" + std::string(text) + "'");
  MetricSelector m;
  m.split = parse_split(text.substr(0, us));
  const auto field = text.substr(us + 1);
  if (field == "loss") {
    m.field = MetricField::Loss;
  } else if (field == "error") {
    m.field = MetricField::Error;
  } else {
    throw ConfigError("bad metric field '" + std::string(field) + "'");
  }
  return m;
}

std::optional<double> MetricSelector::final_of(const TrialRecord& t) const {
  auto it = t.final.find(split);
  if (it == t.final.end()) return std::nullopt;
  return of(it->second);
}

std::optional<double> best_trial_statistic(std::span<const TrialRecord* const> trials,
                                           MetricSelector objective, MetricSelector report) {
  const TrialRecord* best = nullptr;
  double best_value = INFINITY;
  for (const auto* t : trials) {
    if (!t->feasible) continue;
    const auto v = objective.final_of(*t);
    if (!v || std::isnan(*v)) continue;
    if (!best || *v < best_value || (*v == best_value && t->trial_index < best->trial_index)) {
      best = t;
      best_value = *v;
    }
  }
  if (!best) return std::nullopt;
  return report.final_of(*best);
}

std::optional<std::int64_t> steps_to_target(const TrialRecord& trial, double target,
                                            MetricSelector metric) {
  std::optional<std::int64_t> first;
  for (const auto& r : trial.eval_history) {
    if (r.split != metric.split) continue;
    if (metric.of(r) <= target && (!first || r.step < *first)) first = r.step;
  }
  return first;
}

std::string StatisticSpec::to_string() const {
  if (kind == Kind::StepsToTarget) return "steps_to_target(" + format_double(target) + ")";
  return "final_" + report.to_string();
}

StatisticSpec StatisticSpec::parse(std::string_view text) {
  StatisticSpec s;
  constexpr std::string_view kFinal = "final_";
  constexpr std::string_view kSteps = "steps_to_target(";
  if (text.substr(0, kFinal.size()) == kFinal) {
    s.kind = Kind::Final;
    s.report = MetricSelector::parse(text.substr(kFinal.size()));
    return s;
  }
  if (text.substr(0, kSteps.size()) == kSteps && text.back() == ')') {
    s.kind = Kind::StepsToTarget;
    s.report = {Split::Validation, MetricField::Error};
    s.target = parse_double(text.substr(kSteps.size(), text.size() - kSteps.size() - 1));
    return s;
  }
  throw ConfigError("unknown statistic '" + std::string(text) + "'");
}

std::optional<double> StatisticSpec::evaluate(std::span<const TrialRecord* const> trials,
                                              MetricSelector objective) const {
  if (kind == Kind::Final) return best_trial_statistic(trials, objective, report);
  std::optional<double> best;
  for (const auto* t : trials) {
    if (!t->feasible) continue;
    if (auto s = steps_to_target(*t, target, report)) {
      const auto v = static_cast<double>(*s);
      if (!best || v < *best) best = v;
    }
  }
  return best;
}

void BootstrapPlan::validate() const {
  if (k < 1) throw ConfigError("bootstrap: K must be >= 1");
  if (n < k) throw ConfigError("bootstrap: N must be >= K");
  if (b < 1) throw ConfigError("bootstrap: B must be >= 1");
}

double nearest_rank(std::span<const double> sorted, double percent) {
  if (sorted.empty()) throw UsageError("nearest_rank: empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

namespace {

BootstrapSummary summarize(std::vector<double> values, std::int64_t total) {
  BootstrapSummary s;
  s.defined_fraction = static_cast<double>(values.size()) / static_cast<double>(total);
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  Band band;
  // Averaging offsets from the smallest value keeps a constant sample exact.
  const double base = values.front();
  double offset = 0.0;
  for (double v : values) offset += v - base;
  band.mean = std::clamp(base + offset / static_cast<double>(values.size()), base, values.back());
  band.p5 = nearest_rank(values, 5.0);
  band.p95 = nearest_rank(values, 95.0);
  s.band = band;
  return s;
}

std::vector<std::vector<std::size_t>> draw_resamples(std::size_t pool_size,
                                                     const BootstrapPlan& plan) {
  plan.validate();
  if (pool_size != static_cast<std::size_t>(plan.n)) {
    throw UsageError("bootstrap: pool has " + std::to_string(pool_size) + " trials, plan expects " +
                     std::to_string(plan.n));
  }
  auto rng = make_rng({plan.seed, 0xb0075});
  std::uniform_int_distribution<std::size_t> pick(0, pool_size - 1);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(plan.b));
  for (auto& r : out) {
    r.resize(pool_size);
    for (auto& i : r) i = pick(rng);
  }
  return out;
}

IndexStatistic trial_statistic(std::span<const TrialRecord> pool, const StatisticSpec& statistic,
                               MetricSelector objective) {
  return [pool, statistic, objective](std::span<const std::size_t> idx) {
    thread_local std::vector<const TrialRecord*> picked;
    picked.clear();
    for (auto i : idx) picked.push_back(&pool[i]);
    return statistic.evaluate(picked, objective);
  };
}

}  // namespace

BootstrapSummary bootstrap(std::size_t pool_size, const BootstrapPlan& plan,
                           const IndexStatistic& statistic) {
  const auto resamples = draw_resamples(pool_size, plan);
  std::vector<double> values;
  for (const auto& r : resamples) {
    if (auto v = statistic(std::span(r).first(static_cast<std::size_t>(plan.k)))) {
      values.push_back(*v);
    }
  }
  return summarize(std::move(values), plan.b);
}

BootstrapSummary bootstrap(std::span<const TrialRecord> pool, const BootstrapPlan& plan,
                           const StatisticSpec& statistic, MetricSelector objective) {
  return bootstrap(pool.size(), plan, trial_statistic(pool, statistic, objective));
}

std::vector<std::pair<std::int64_t, BootstrapSummary>> best_so_far_curve(
    std::size_t pool_size, const BootstrapPlan& plan, const IndexStatistic& statistic,
    std::span<const std::int64_t> budgets) {
  for (auto k : budgets) {
    if (k < 1 || k > plan.n) {
      throw UsageError("best_so_far_curve: budget " + std::to_string(k) + " outside [1, N]");
    }
  }
  const auto resamples = draw_resamples(pool_size, plan);
  std::vector<std::pair<std::int64_t, BootstrapSummary>> out;
  for (auto k : budgets) {
    std::vector<double> values;
    for (const auto& r : resamples) {
      if (auto v = statistic(std::span(r).first(static_cast<std::size_t>(k)))) values.push_back(*v);
    }
    out.emplace_back(k, summarize(std::move(values), plan.b));
  }
  return out;
}

std::vector<std::pair<std::int64_t, BootstrapSummary>> best_so_far_curve(
    std::span<const TrialRecord> pool, const BootstrapPlan& plan, const StatisticSpec& statistic,
    std::span<const std::int64_t> budgets, MetricSelector objective) {
  return best_so_far_curve(pool.size(), plan, trial_statistic(pool, statistic, objective), budgets);
}

}  // namespace optbench
