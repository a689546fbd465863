// SPDX-License-Identifier: Apache-2.0
#include "optbench/harness.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "optbench/errors.hpp"
#include "optbench/records.hpp"
#include "optbench/seeding.hpp"

namespace optbench {

namespace fs = std::filesystem;
using detail::json;

std::uint64_t trial_batch_seed(const StudyConfig& study, std::int64_t trial_index) {
  return derive_seed({study.seeds.batch, static_cast<std::uint64_t>(trial_index), 0xba7c});
}

std::uint64_t trial_init_seed(const StudyConfig& study, std::int64_t trial_index) {
  return derive_seed({study.seeds.batch, static_cast<std::uint64_t>(trial_index), 0x1a17});
}

TrialRecord run_trial(const StudyConfig& study, const OptimizerEntry& entry,
                      std::int64_t trial_index, const Workload& base_workload) {
  TrialRecord rec;
  rec.optimizer = entry.name;
  rec.trial_index = trial_index;
  rec.point = decode(entry.space, sample_unit(entry.space, trial_index, study.seeds.search),
                     trial_index);
  if (!rec.point.valid) return rec;

  const auto settings = settings_for(entry.space, rec.point, study.budget_steps);
  std::shared_ptr<const Workload> owned;
  const Workload* workload = &base_workload;
  if (settings.l2 && *settings.l2 != base_workload.l2()) {
    owned = base_workload.with_l2(*settings.l2);
    workload = owned.get();
  }

  const auto batch_seed = trial_batch_seed(study, trial_index);
  auto theta = workload->initial_theta(trial_init_seed(study, trial_index)).values;
  auto state = init_state(settings.optimizer, theta.size());
  try {
    for (std::int64_t t = 0; t < study.budget_steps; ++t) {
      const auto lg = workload->loss_and_grad(theta, t, batch_seed);
      step_in_place(settings.optimizer, state, theta, lg.grad.values, lr_at(settings.schedule, t));
      const std::int64_t done = t + 1;
      if (done % study.eval_every == 0 || done == study.budget_steps) {
        EvalRecord evals[3];
        for (int s = 0; s < 3; ++s) {
          evals[s] = workload->evaluate(theta, kAllSplits[s]);
          evals[s].step = done;
          if (!std::isfinite(evals[s].loss)) throw DivergenceError("non-finite evaluation loss", done);
        }
        rec.eval_history.insert(rec.eval_history.end(), std::begin(evals), std::end(evals));
      }
      rec.wall_steps = done;
    }
  } catch (const DivergenceError& e) {
    rec.feasible = false;
    rec.failed_step = e.step();
    return rec;
  }
  rec.feasible = true;
  for (auto it = rec.eval_history.end() - 3; it != rec.eval_history.end(); ++it) {
    rec.final[it->split] = *it;
  }
  return rec;
}

TrialRecord run_trial(const StudyConfig& study, const OptimizerEntry& entry,
                      std::int64_t trial_index) {
  const auto workload = make_workload(study.workload);
  return run_trial(study, entry, trial_index, *workload);
}

const OptimizerResult& StudyResult::optimizer(std::string_view name) const {
  for (const auto& o : optimizers) {
    if (o.name == name) return o;
  }
  throw UsageError("no optimizer named '" + std::string(name) + "' in result");
}

namespace {

// Tracks the "until N feasible" stopping rule over records in trial order.
struct PoolProgress {
  std::int64_t n_target = 0;
  std::int64_t feasible = 0;
  std::int64_t infeasible = 0;
  std::int64_t consecutive_infeasible = 0;
  std::int64_t next_index = 0;

  void add(const TrialRecord& r) {
    if (r.trial_index != next_index) {
      throw ConfigError("trial records out of order: expected trial " + std::to_string(next_index) +
                        ", got " + std::to_string(r.trial_index));
    }
    ++next_index;
    if (r.feasible) {
      ++feasible;
      consecutive_infeasible = 0;
    } else {
      ++infeasible;
      ++consecutive_infeasible;
    }
  }
  bool full() const { return feasible >= n_target; }
  bool aborted() const { return consecutive_infeasible > kMaxInfeasibleFactor * n_target; }
  bool done() const { return full() || aborted(); }
};

// Runs trials start, start+1, ... on `parallelism` threads and hands them to
// `sink` strictly in index order until it returns false.
void run_in_order(std::int64_t start, int parallelism,
                  const std::function<TrialRecord(std::int64_t)>& trial,
                  const std::function<bool(TrialRecord&&)>& sink) {
  if (parallelism <= 1) {
    for (std::int64_t i = start;; ++i) {
      if (!sink(trial(i))) return;
    }
  }
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::int64_t, TrialRecord> finished;
  std::atomic<std::int64_t> next{start};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;

  std::vector<std::jthread> workers;
  for (int w = 0; w < parallelism; ++w) {
    workers.emplace_back([&] {
      while (!stop.load()) {
        const auto i = next.fetch_add(1);
        try {
          auto rec = trial(i);
          std::lock_guard lock(mu);
          finished.emplace(i, std::move(rec));
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          stop = true;
        }
        cv.notify_all();
      }
    });
  }
  for (std::int64_t want = start;; ++want) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return failure || finished.count(want); });
    if (failure) break;
    auto rec = std::move(finished.at(want));
    finished.erase(want);
    lock.unlock();
    if (!sink(std::move(rec))) break;
  }
  stop = true;
  workers.clear();  // joins
  if (failure) std::rethrow_exception(failure);
}

struct StudyFiles {
  fs::path dir;
  fs::path study() const { return dir / kStudyFile; }
  fs::path trials() const { return dir / kTrialsFile; }
};

void write_study_file(const StudyFiles& files, const StudyConfig& config, const std::string& hash) {
  json j = {{"hash", hash},
            {"code_version", kCodeVersion},
            {"config", json::parse(to_json(config))}};
  std::ofstream out(files.study());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("cannot write " + files.study().string());
}

std::vector<TrialRecord> load_existing(const StudyFiles& files, const std::string& hash) {
  std::vector<TrialRecord> out;
  if (!fs::exists(files.trials())) return out;
  std::ifstream in(files.trials());
  for (auto& parsed : read_records(in)) {
    if (parsed.study_hash != hash) {
      throw ConfigError(files.trials().string() + " holds records of a different study (" +
                        parsed.study_hash + ")");
    }
    out.push_back(std::move(parsed.record));
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& config, const RunOptions& options) {
  config.validate();
  const auto hash = config_hash(config);
  const auto workload = make_workload(config.workload);

  std::vector<TrialRecord> records;
  std::ofstream appender;
  if (options.out_dir) {
    StudyFiles files{*options.out_dir};
    fs::create_directories(files.dir);
    if (fs::exists(files.study())) {
      std::ifstream in(files.study());
      const auto existing = json::parse(in);
      if (existing.value("hash", "") != hash) {
        throw ConfigError(files.dir.string() + " belongs to a different study config");
      }
    } else {
      write_study_file(files, config, hash);
    }
    records = load_existing(files, hash);
    appender.open(files.trials(), std::ios::app);
    if (!appender) throw ConfigError("cannot append to " + files.trials().string());
  }

  for (const auto& entry : config.optimizers) {
    PoolProgress progress{config.plan_for(entry).n};
    for (const auto& r : records) {
      if (r.optimizer == entry.name) progress.add(r);
    }
    if (progress.done()) continue;
    run_in_order(
        progress.next_index, options.parallelism,
        [&](std::int64_t i) { return run_trial(config, entry, i, *workload); },
        [&](TrialRecord&& rec) {
          progress.add(rec);
          if (appender.is_open()) {
            appender << record_to_line(rec, hash) << '\n';
            appender.flush();
          }
          if (options.on_record) options.on_record(rec);
          records.push_back(std::move(rec));
          return !progress.done();
        });
  }
  return compute_result(config, records);
}

StudyResult compute_result(const StudyConfig& config, const std::vector<TrialRecord>& records) {
  StudyResult result;
  result.config = config;
  result.config_hash = config_hash(config);
  for (const auto& entry : config.optimizers) {
    OptimizerResult opt;
    opt.name = entry.name;
    opt.plan = config.plan_for(entry);
    PoolProgress progress{opt.plan.n};
    for (const auto& r : records) {
      if (r.optimizer != entry.name || progress.done()) continue;
      progress.add(r);
      if (r.feasible) opt.pool.push_back(r);
    }
    opt.n_infeasible = progress.infeasible;
    if (progress.aborted() && !progress.full()) {
      opt.aborted = true;
      opt.diagnostic = "aborted after " + std::to_string(progress.consecutive_infeasible) +
                       " consecutive infeasible trials (" + std::to_string(progress.feasible) +
                       " feasible of " + std::to_string(opt.plan.n) + " needed)";
      result.optimizers.push_back(std::move(opt));
      continue;
    }
    if (!progress.full()) {
      throw ConfigError("optimizer '" + entry.name + "' has only " +
                        std::to_string(progress.feasible) + " of " + std::to_string(opt.plan.n) +
                        " feasible trials; rerun to resume");
    }
    const auto budgets = config.budgets_for(opt.plan);
    for (const auto& spec : config.statistics) {
      StatisticResult s{spec, bootstrap(opt.pool, opt.plan, spec, config.objective), {}};
      s.curve = best_so_far_curve(opt.pool, opt.plan, spec, budgets, config.objective);
      opt.statistics.push_back(std::move(s));
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < opt.pool.size(); ++i) {
      const auto v = config.objective.final_of(opt.pool[i]);
      if (!v) continue;
      if (!best || *v < *config.objective.final_of(opt.pool[*best])) best = i;
    }
    if (best) {
      opt.best_trial = opt.pool[*best].trial_index;
      std::vector<HyperparameterPoint> points;
      for (const auto& r : opt.pool) points.push_back(r.point);
      opt.boundary = boundary_report(entry.space, points, *best, config.boundary_margin);
    }
    result.optimizers.push_back(std::move(opt));
  }
  return result;
}

StudyResult load_result(const fs::path& dir) {
  StudyFiles files{dir};
  std::ifstream in(files.study());
  if (!in) throw ConfigError("no " + std::string(kStudyFile) + " in " + dir.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(files.study().string() + ": " + e.what());
  }
  const auto config = parse_study_config(j.at("config").dump());
  const auto hash = config_hash(config);
  if (j.value("hash", "") != hash) {
    throw ConfigError(files.study().string() + ": stored hash does not match its config");
  }
  return compute_result(config, load_existing(files, hash));
}

}  // namespace optbench
