// SPDX-License-Identifier: Apache-2.0
//
// Study configuration: one workload, a fixed step budget, and a list of
// optimizers each with its own search space.
//
// File format is JSON; every object rejects unknown keys.
//
//   {
//     "name": "desk",
//     "workload": {"kind": "tiny_mlp", "dim": 8, "hidden": 16, ...},
//     "budget_steps": 2000, "eval_every": 100,
//     "objective": "val_error",
//     "statistics": ["final_val_error", "final_test_error", "steps_to_target(0.2)"],
//     "plan": {"k": 50, "n": 100, "b": 100},
//     "curve_budgets": [1, 2, 4, 8, 16, 32, 50],
//     "boundary_margin": 0.05,
//     "seeds": {"data": 0, "search": 1, "batch": 2, "bootstrap": 3},
//     "optimizers": [
//       {"name": "adam", "rule": "adam", "schedule": "linear_decay", "coupling": "eps",
//        "axes": [{"name": "epsilon", "kind": "log10", "low": -10, "high": 2}, ...],
//        "fixed": {"decay_fraction": 0.9},
//        "plan": {"k": 50, "n": 100}}
//     ]
//   }
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optbench/search.hpp"
#include "optbench/stats.hpp"
#include "optbench/workloads.hpp"

namespace optbench {

struct OptimizerEntry {
  std::string name;
  SearchSpace space;
  std::optional<BootstrapPlan> plan;  // overrides the study default
};

struct StudySeeds {
  std::uint64_t data = 0;
  std::uint64_t search = 0;
  std::uint64_t batch = 0;
  std::uint64_t bootstrap = 0;
};

struct StudyConfig {
  std::string name = "study";
  WorkloadConfig workload;
  std::int64_t budget_steps = 1000;
  std::int64_t eval_every = 100;
  MetricSelector objective{Split::Validation, MetricField::Error};
  std::vector<StatisticSpec> statistics;
  BootstrapPlan plan;
  std::vector<std::int64_t> curve_budgets;  // empty: powers of two up to K
  double boundary_margin = 0.05;
  StudySeeds seeds;
  std::vector<OptimizerEntry> optimizers;

  void validate() const;

  /// Plan for an entry, with K/N/B from the override when present and the
  /// seed from seeds.bootstrap unless the override set one.
  BootstrapPlan plan_for(const OptimizerEntry& entry) const;
  std::vector<std::int64_t> budgets_for(const BootstrapPlan& plan) const;
  const OptimizerEntry& entry(std::string_view name) const;
};

StudyConfig parse_study_config(std::string_view json_text);
StudyConfig load_study_config(const std::string& path);

/// Canonical JSON (sorted keys, every field explicit); parses back to an
/// equal config.
std::string to_json(const StudyConfig& config);

/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const StudyConfig& config);

/// A single optimizer entry in the same schema as a study's "optimizers" list;
/// used by `sample --space`.
OptimizerEntry parse_optimizer_entry(std::string_view json_text);

}  // namespace optbench
