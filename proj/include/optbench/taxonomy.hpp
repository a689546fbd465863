// SPDX-License-Identifier: Apache-2.0
//
// Inclusion relationships between update rules: configure a more general
// rule so that it reproduces (exactly, or in the limit of large epsilon) the
// trajectory of a specialization, and measure how far apart two
// trajectories actually end up.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optbench/schedules.hpp"
#include "optbench/update_rules.hpp"
#include "optbench/workloads.hpp"

namespace optbench {

/// An update rule together with the learning-rate schedule driving it.
struct Optimizer {
  OptimizerConfig config;
  ScheduleConfig schedule;
};

struct InclusionPair {
  Rule special;
  Rule general;
  bool exact;  // false: only in the large-epsilon limit
};

/// The six proved inclusions.
inline constexpr InclusionPair kInclusionPairs[] = {
    {Rule::SGD, Rule::Momentum, true},       {Rule::SGD, Rule::Nesterov, true},
    {Rule::Momentum, Rule::RMSProp, true},   {Rule::Nesterov, Rule::RMSterov, true},
    {Rule::Momentum, Rule::Adam, false},     {Rule::Nesterov, Rule::NAdam, false},
};

std::optional<InclusionPair> find_inclusion(Rule special, Rule general);

/// Configures `target` to imitate `source`.
///
/// Exact pairs keep the schedule. Momentum -> RMSProp and Nesterov -> RMSterov
/// are exact only for a constant schedule: RMSProp accumulates lr * g while
/// momentum scales the whole velocity by the current lr. For Adam/NAdam the result uses beta1 = gamma,
/// beta2 = 0, the given epsilon and the explicit schedule
///   alpha_t = epsilon * eta_t * (1 - gamma^(t+1)) / (1 - gamma),
/// which needs a finite schedule horizon. Throws UnsupportedMapping for pairs
/// outside kInclusionPairs and ConfigError for epsilon <= 0 on limit pairs.
Optimizer map_to_general(const Optimizer& source, Rule target, double epsilon = 0.0);

struct DivergenceReport {
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;  // per step, divided by max(1, |theta_a|_inf, |theta_b|_inf)
  std::int64_t steps = 0;
};

/// Runs both optimizers from theta0 for `steps` updates, each evaluating the
/// gradient at its own iterate on the same mini-batch stream, and reports the
/// largest coordinate gap seen. Throws DivergenceError naming the run that
/// went non-finite.
DivergenceReport trajectory_divergence(const Optimizer& a, const Optimizer& b,
                                       const Workload& workload,
                                       const ParameterVector& theta0, std::int64_t steps,
                                       std::uint64_t batch_seed = 0);

// -- Inclusion check over the built-in workloads ----------------------------

struct InclusionCheckOptions {
  std::int64_t exact_steps = 200;
  std::int64_t limit_steps = 100;
  std::vector<double> eps_ladder{1e2, 1e4, 1e6, 1e8};
  double exact_tolerance = 1e-12;
  double limit_tolerance = 1e-5;
  std::uint64_t seed = 0;
};

struct WorkloadCheck {
  WorkloadKind workload;
  std::vector<double> rel_deviations;  // one entry (exact) or one per ladder rung
  double abs_deviation = 0.0;          // last entry's absolute deviation
  bool pass = false;
  std::string note;
};

struct InclusionCheck {
  InclusionPair pair;
  std::vector<WorkloadCheck> workloads;
  bool pass = false;
};

/// Default desk-scale config for each workload kind used by the check.
WorkloadConfig builtin_workload(WorkloadKind kind, std::uint64_t seed = 0);

/// Exact pairs: relative deviation <= exact_tolerance over exact_steps on
/// every workload (and exactly 0 for the SGD pairs). Limit pairs: deviation
/// non-increasing along eps_ladder on every workload, with the last rung
/// <= limit_tolerance on the deterministic quadratic.
std::vector<InclusionCheck> check_inclusions(const InclusionCheckOptions& options = {});

}  // namespace optbench
