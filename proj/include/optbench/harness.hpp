// SPDX-License-Identifier: Apache-2.0
//
// Runs tuning studies: for each optimizer, trials at increasing trial index
// until N feasible ones exist, then bootstrap statistics over that pool.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optbench/stats.hpp"
#include "optbench/study.hpp"
#include "optbench/workloads.hpp"

namespace optbench {

inline constexpr const char* kCodeVersion = "optbench 0.1.0";

/// Mini-batch and initialization keys for a trial. Both depend only on the
/// study's batch seed and the trial index, so entries with identical search
/// spaces see identical data.
std::uint64_t trial_batch_seed(const StudyConfig& study, std::int64_t trial_index);
std::uint64_t trial_init_seed(const StudyConfig& study, std::int64_t trial_index);

/// One trial. Divergence never escapes: it becomes an infeasible record.
TrialRecord run_trial(const StudyConfig& study, const OptimizerEntry& entry,
                      std::int64_t trial_index, const Workload& workload);
TrialRecord run_trial(const StudyConfig& study, const OptimizerEntry& entry,
                      std::int64_t trial_index);

struct StatisticResult {
  StatisticSpec spec;
  BootstrapSummary summary;
  std::vector<std::pair<std::int64_t, BootstrapSummary>> curve;
};

struct OptimizerResult {
  std::string name;
  BootstrapPlan plan;
  std::vector<TrialRecord> pool;        // feasible, in trial order, exactly N unless aborted
  std::int64_t n_infeasible = 0;        // infeasible trials before the pool filled
  bool aborted = false;
  std::string diagnostic;
  std::vector<StatisticResult> statistics;  // empty when aborted
  std::optional<std::int64_t> best_trial;   // by the study objective over the whole pool
  std::map<std::string, BoundarySide> boundary;
};

struct StudyResult {
  StudyConfig config;
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::vector<OptimizerResult> optimizers;

  const OptimizerResult& optimizer(std::string_view name) const;
};

struct RunOptions {
  int parallelism = 1;
  std::optional<std::filesystem::path> out_dir;  // persist and resume when set
  std::function<void(const TrialRecord&)> on_record;  // called in trial order
};

/// Infeasible-trial safety valve: more than this many times N consecutive
/// infeasible trials aborts the optimizer.
inline constexpr std::int64_t kMaxInfeasibleFactor = 10;

StudyResult run_study(const StudyConfig& config, const RunOptions& options = {});

/// Statistics from trial records alone (all records of all optimizers, in
/// file order). Records past an optimizer's N-th feasible trial are ignored.
StudyResult compute_result(const StudyConfig& config, const std::vector<TrialRecord>& records);

/// Files inside a results directory.
inline constexpr const char* kStudyFile = "study.json";
inline constexpr const char* kTrialsFile = "trials.jsonl";

/// Reloads a results directory written by run_study.
StudyResult load_result(const std::filesystem::path& dir);

}  // namespace optbench
