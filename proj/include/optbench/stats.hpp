// SPDX-License-Identifier: Apache-2.0
//
// Trial statistics: best-trial selection, steps-to-target, and bootstrap
// estimates of "what would a K-trial search have found" from a pool of N
// trials.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optbench/search.hpp"
#include "optbench/workloads.hpp"

namespace optbench {

struct TrialRecord {
  std::string optimizer;  // study entry name
  std::int64_t trial_index = 0;
  HyperparameterPoint point;
  bool feasible = false;
  std::optional<std::int64_t> failed_step;  // set for infeasible trials that ran
  std::vector<EvalRecord> eval_history;     // ordered by step, then split
  std::map<Split, EvalRecord> final;
  std::int64_t wall_steps = 0;
};

enum class MetricField { Loss, Error };

struct MetricSelector {
  Split split = Split::Validation;
  MetricField field = MetricField::Error;

  /// "val_error", "train_loss", ...
  std::string to_string() const;
  static MetricSelector parse(std::string_view text);

  double of(const EvalRecord& r) const { return field == MetricField::Loss ? r.loss : r.error; }
  /// Final value; nullopt when the trial has no final record for the split.
  std::optional<double> final_of(const TrialRecord& t) const;
};

/// `report` metric of the trial minimizing `objective`; ties go to the lowest
/// trial_index. nullopt if no trial is feasible.
std::optional<double> best_trial_statistic(std::span<const TrialRecord* const> trials,
                                           MetricSelector objective, MetricSelector report);

/// Smallest recorded step at which `metric` <= target.
std::optional<std::int64_t> steps_to_target(const TrialRecord& trial, double target,
                                            MetricSelector metric);

/// A named statistic over the first K trials of a (resampled) pool:
///   "final_<split>_<loss|error>"  best-trial statistic, selecting on `objective`
///   "steps_to_target(x)"          fewest steps for validation error <= x over
///                                 the trials that reached it
struct StatisticSpec {
  enum class Kind { Final, StepsToTarget };
  Kind kind = Kind::Final;
  MetricSelector report;
  double target = 0.0;

  std::string to_string() const;
  static StatisticSpec parse(std::string_view text);

  std::optional<double> evaluate(std::span<const TrialRecord* const> trials,
                                 MetricSelector objective) const;
};

struct BootstrapPlan {
  std::int64_t k = 1;    // selection budget
  std::int64_t n = 1;    // pool size
  std::int64_t b = 100;  // bootstrap samples
  std::uint64_t seed = 0;

  void validate() const;
};

struct Band {
  double mean = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

struct BootstrapSummary {
  std::optional<Band> band;  // empty when the statistic was never defined
  double defined_fraction = 0.0;

  bool attained() const noexcept { return band.has_value(); }
};

/// Statistic over the first-k resampled pool indices; nullopt = undefined.
using IndexStatistic = std::function<std::optional<double>(std::span<const std::size_t>)>;

/// Draws plan.b resamples of size plan.n with replacement and evaluates the
/// statistic on the first plan.k indices of each. Undefined samples are
/// dropped and reflected in defined_fraction. Percentiles are nearest-rank.
BootstrapSummary bootstrap(std::size_t pool_size, const BootstrapPlan& plan,
                           const IndexStatistic& statistic);

BootstrapSummary bootstrap(std::span<const TrialRecord> pool, const BootstrapPlan& plan,
                           const StatisticSpec& statistic,
                           MetricSelector objective = {Split::Validation, MetricField::Error});

/// One bootstrap summary per budget, all budgets sharing the same resamples.
std::vector<std::pair<std::int64_t, BootstrapSummary>> best_so_far_curve(
    std::size_t pool_size, const BootstrapPlan& plan, const IndexStatistic& statistic,
    std::span<const std::int64_t> budgets);

std::vector<std::pair<std::int64_t, BootstrapSummary>> best_so_far_curve(
    std::span<const TrialRecord> pool, const BootstrapPlan& plan, const StatisticSpec& statistic,
    std::span<const std::int64_t> budgets,
    MetricSelector objective = {Split::Validation, MetricField::Error});

/// Nearest-rank percentile of sorted data: element ceil(p/100 * n) (1-based).
double nearest_rank(std::span<const double> sorted, double percent);

}  // namespace optbench
