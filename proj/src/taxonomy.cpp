// SPDX-License-Identifier: Apache-2.0
#include "optbench/taxonomy.hpp"

#include <algorithm>
#include <cmath>

#include "optbench/errors.hpp"
#include "optbench/numfmt.hpp"
#include "optbench/seeding.hpp"

namespace optbench {

std::optional<InclusionPair> find_inclusion(Rule special, Rule general) {
  for (const auto& p : kInclusionPairs) {
    if (p.special == special && p.general == general) return p;
  }
  return std::nullopt;
}

Optimizer map_to_general(const Optimizer& source, Rule target, double epsilon) {
  const auto pair = find_inclusion(source.config.rule, target);
  if (!pair) {
    throw UnsupportedMapping("no inclusion " + std::string(to_string(source.config.rule)) +
                             " -> " + std::string(to_string(target)));
  }
  source.config.validate();
  source.schedule.validate();
  const double gamma = source.config.rule == Rule::SGD ? 0.0 : source.config.gamma;

  switch (target) {
    case Rule::Momentum:
      return {OptimizerConfig::momentum(0.0), source.schedule};
    case Rule::Nesterov:
      return {OptimizerConfig::nesterov(0.0), source.schedule};
    case Rule::RMSProp:
      return {OptimizerConfig::rmsprop(gamma, 1.0, 0.0), source.schedule};
    case Rule::RMSterov:
      return {OptimizerConfig::rmsterov(gamma, 1.0, 0.0), source.schedule};
    case Rule::Adam:
    case Rule::NAdam: {
      if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("limit mapping needs a finite epsilon > 0, got " +
                          format_double(epsilon));
      }
      if (gamma >= 1.0) throw ConfigError("limit mapping needs gamma < 1");
      const auto horizon = source.schedule.horizon();
      if (!horizon) throw ConfigError("limit mapping needs a schedule with total_steps");
      std::vector<double> alpha(static_cast<std::size_t>(*horizon));
      for (std::int64_t t = 0; t < *horizon; ++t) {
        const double bias = 1.0 - std::pow(gamma, static_cast<double>(t + 1));
        alpha[static_cast<std::size_t>(t)] =
            epsilon * lr_at(source.schedule, t) * bias / (1.0 - gamma);
      }
      OptimizerConfig cfg = target == Rule::Adam ? OptimizerConfig::adam(gamma, 0.0, epsilon)
                                                 : OptimizerConfig::nadam(gamma, 0.0, epsilon);
      return {cfg, ScheduleConfig::explicit_rates(std::move(alpha))};
    }
    default:
      break;
  }
  throw UnsupportedMapping("no inclusion into " + std::string(to_string(target)));
}

DivergenceReport trajectory_divergence(const Optimizer& a, const Optimizer& b,
                                       const Workload& workload, const ParameterVector& theta0,
                                       std::int64_t steps, std::uint64_t batch_seed) {
  if (theta0.dim() != workload.param_count()) {
    throw UsageError("trajectory_divergence: theta0 has wrong dimension");
  }
  a.config.validate();
  b.config.validate();
  a.schedule.validate();
  b.schedule.validate();

  struct Run {
    const Optimizer& opt;
    const char* label;
    OptimizerState state;
    std::vector<double> theta;
  };
  Run runs[2] = {{a, "a", init_state(a.config, theta0.dim()), theta0.values},
                 {b, "b", init_state(b.config, theta0.dim()), theta0.values}};

  DivergenceReport report;
  for (std::int64_t t = 0; t < steps; ++t) {
    for (auto& run : runs) {
      try {
        const auto lg = workload.loss_and_grad(run.theta, t, batch_seed);
        step_in_place(run.opt.config, run.state, run.theta, lg.grad.values,
                      lr_at(run.opt.schedule, t));
      } catch (const DivergenceError&) {
        throw DivergenceError(std::string("trajectory ") + run.label + " (" +
                                  run.opt.config.to_string() + ") diverged",
                              t);
      }
    }
    double scale = 1.0;
    double gap = 0.0;
    for (std::size_t i = 0; i < theta0.dim(); ++i) {
      scale = std::max({scale, std::abs(runs[0].theta[i]), std::abs(runs[1].theta[i])});
      gap = std::max(gap, std::abs(runs[0].theta[i] - runs[1].theta[i]));
    }
    report.max_abs_deviation = std::max(report.max_abs_deviation, gap);
    report.max_rel_deviation = std::max(report.max_rel_deviation, gap / scale);
  }
  report.steps = steps;
  return report;
}

WorkloadConfig builtin_workload(WorkloadKind kind, std::uint64_t seed) {
  WorkloadConfig c;
  c.kind = kind;
  c.data_seed = seed;
  switch (kind) {
    case WorkloadKind::Quadratic:
      c.dim = 10;
      c.condition_number = 10;
      break;
    case WorkloadKind::NoisyQuadratic:
      c.dim = 10;
      c.condition_number = 10;
      c.noise_scale = 0.1;
      break;
    case WorkloadKind::LogisticRegression:
      c.dim = 5;
      c.class_separation = 2.0;
      c.n_train = 256;
      c.n_val = 128;
      c.n_test = 128;
      c.batch_size = 16;
      break;
    case WorkloadKind::TinyMLP:
      c.dim = 4;
      c.hidden = 8;
      c.classes = 3;
      c.n_train = 256;
      c.n_val = 128;
      c.n_test = 128;
      c.batch_size = 16;
      break;
  }
  return c;
}

std::vector<InclusionCheck> check_inclusions(const InclusionCheckOptions& opt) {
  if (opt.eps_ladder.empty()) throw ConfigError("taxonomy check: empty epsilon ladder");
  std::vector<InclusionCheck> out;
  for (const auto& pair : kInclusionPairs) {
    InclusionCheck check{pair, {}, true};
    const auto steps = pair.exact ? opt.exact_steps : opt.limit_steps;
    // Velocity-form momentum and the lr-inside accumulator of RMSProp agree only
    // while the learning rate is constant, so exact pairs run on a flat schedule.
    Optimizer source{pair.special == Rule::SGD ? OptimizerConfig::sgd()
                     : pair.special == Rule::Momentum ? OptimizerConfig::momentum(0.9)
                                                      : OptimizerConfig::nesterov(0.9),
                     pair.exact ? ScheduleConfig::constant(0.05, steps)
                                : ScheduleConfig::linear_decay(0.05, 0.1, 0.8, steps)};
    for (auto kind : kAllWorkloadKinds) {
      const auto workload = make_workload(builtin_workload(kind, opt.seed));
      const auto theta0 = workload->initial_theta(derive_seed({opt.seed, 1}));
      WorkloadCheck wc{kind, {}, 0.0, true, {}};
      try {
        if (pair.exact) {
          const auto mapped = map_to_general(source, pair.general);
          const auto r = trajectory_divergence(source, mapped, *workload, theta0, steps, opt.seed);
          wc.rel_deviations.push_back(r.max_rel_deviation);
          wc.abs_deviation = r.max_abs_deviation;
          wc.pass = pair.special == Rule::SGD ? r.max_abs_deviation == 0.0
                                              : r.max_rel_deviation <= opt.exact_tolerance;
        } else {
          for (double eps : opt.eps_ladder) {
            const auto mapped = map_to_general(source, pair.general, eps);
            const auto r =
                trajectory_divergence(source, mapped, *workload, theta0, steps, opt.seed);
            wc.rel_deviations.push_back(r.max_rel_deviation);
            wc.abs_deviation = r.max_abs_deviation;
          }
          const auto& d = wc.rel_deviations;
          wc.pass = std::adjacent_find(d.begin(), d.end(), std::less<>()) == d.end();
          if (!wc.pass) wc.note = "not monotone in epsilon";
          if (kind == WorkloadKind::Quadratic && d.back() > opt.limit_tolerance) {
            wc.pass = false;
            wc.note = "largest epsilon above tolerance";
          }
        }
      } catch (const DivergenceError& e) {
        wc.pass = false;
        wc.note = e.what();
      }
      check.pass = check.pass && wc.pass;
      check.workloads.push_back(std::move(wc));
    }
    out.push_back(std::move(check));
  }
  return out;
}

}  // namespace optbench
