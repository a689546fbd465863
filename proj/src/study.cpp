// SPDX-License-Identifier: Apache-2.0
#include "optbench/study.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "optbench/seeding.hpp"

namespace optbench {

using detail::get_or;
using detail::get_required;
using detail::json;
using detail::reject_unknown_keys;

namespace {

WorkloadConfig parse_workload(const json& j) {
  constexpr std::string_view where = "workload";
  reject_unknown_keys(j, where,
                      {"kind", "dim", "hidden", "classes", "condition_number", "noise_scale",
                       "class_separation", "label_noise", "n_train", "n_val", "n_test",
                       "batch_size", "l2", "data_seed"});
  WorkloadConfig w;
  w.kind = parse_workload_kind(get_required<std::string>(j, "kind", where));
  w.dim = get_or(j, "dim", w.dim, where);
  w.hidden = get_or(j, "hidden", w.hidden, where);
  w.classes = get_or(j, "classes", w.classes, where);
  w.condition_number = get_or(j, "condition_number", w.condition_number, where);
  w.noise_scale = get_or(j, "noise_scale", w.noise_scale, where);
  w.class_separation = get_or(j, "class_separation", w.class_separation, where);
  w.label_noise = get_or(j, "label_noise", w.label_noise, where);
  w.n_train = get_or(j, "n_train", w.n_train, where);
  w.n_val = get_or(j, "n_val", w.n_val, where);
  w.n_test = get_or(j, "n_test", w.n_test, where);
  w.batch_size = get_or(j, "batch_size", w.batch_size, where);
  w.l2 = get_or(j, "l2", w.l2, where);
  if (j.contains("data_seed")) {
    throw ConfigError("workload: set the data seed under \"seeds\": {\"data\": ...}");
  }
  return w;
}

json workload_json(const WorkloadConfig& w) {
  return {{"kind", to_string(w.kind)},
          {"dim", w.dim},
          {"hidden", w.hidden},
          {"classes", w.classes},
          {"condition_number", w.condition_number},
          {"noise_scale", w.noise_scale},
          {"class_separation", w.class_separation},
          {"label_noise", w.label_noise},
          {"n_train", w.n_train},
          {"n_val", w.n_val},
          {"n_test", w.n_test},
          {"batch_size", w.batch_size},
          {"l2", w.l2}};
}

BootstrapPlan parse_plan(const json& j, const BootstrapPlan& defaults, std::string_view where) {
  reject_unknown_keys(j, where, {"k", "n", "b", "seed"});
  BootstrapPlan p = defaults;
  p.k = get_or(j, "k", p.k, where);
  p.n = get_or(j, "n", p.n, where);
  p.b = get_or(j, "b", p.b, where);
  p.seed = get_or(j, "seed", p.seed, where);
  return p;
}

json plan_json(const BootstrapPlan& p) {
  return {{"k", p.k}, {"n", p.n}, {"b", p.b}, {"seed", p.seed}};
}

Axis parse_axis(const json& j, std::string_view where) {
  reject_unknown_keys(j, where, {"name", "kind", "low", "high", "values"});
  Axis a;
  a.name = get_required<std::string>(j, "name", where);
  a.kind = parse_axis_kind(get_required<std::string>(j, "kind", where));
  if (a.kind == AxisKind::DiscreteSet) {
    if (j.contains("low") || j.contains("high")) {
      throw ConfigError(std::string(where) + ": discrete axis takes 'values', not low/high");
    }
    a.values = get_required<std::vector<double>>(j, "values", where);
  } else {
    if (j.contains("values")) {
      throw ConfigError(std::string(where) + ": continuous axis takes low/high, not 'values'");
    }
    a.low = get_required<double>(j, "low", where);
    a.high = get_required<double>(j, "high", where);
  }
  return a;
}

json axis_json(const Axis& a) {
  json j = {{"name", a.name}, {"kind", to_string(a.kind)}};
  if (a.kind == AxisKind::DiscreteSet) {
    j["values"] = a.values;
  } else {
    j["low"] = a.low;
    j["high"] = a.high;
  }
  return j;
}

OptimizerEntry parse_entry(const json& j, const std::string& where, bool name_required) {
  reject_unknown_keys(j, where,
                      {"name", "rule", "schedule", "coupling", "axes", "fixed", "plan"});
  OptimizerEntry e;
  e.space.rule = parse_rule(get_required<std::string>(j, "rule", where));
  e.name = name_required ? get_required<std::string>(j, "name", where)
                         : get_or<std::string>(j, "name", std::string(to_string(e.space.rule)), where);
  e.space.schedule = parse_schedule_kind(get_or<std::string>(j, "schedule", "constant", where));
  e.space.coupling = parse_coupling(get_or<std::string>(j, "coupling", "none", where));
  if (j.contains("axes")) {
    const auto& axes = j.at("axes");
    if (!axes.is_array()) throw ConfigError(where + ": 'axes' must be a list");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      e.space.axes.push_back(parse_axis(axes[i], where + ".axes[" + std::to_string(i) + "]"));
    }
  }
  e.space.fixed = get_or<std::map<std::string, double>>(j, "fixed", {}, where);
  if (j.contains("plan")) e.plan = parse_plan(j.at("plan"), BootstrapPlan{}, where + ".plan");
  e.space.validate();
  return e;
}

json entry_json(const OptimizerEntry& e) {
  json axes = json::array();
  for (const auto& a : e.space.axes) axes.push_back(axis_json(a));
  json j = {{"name", e.name},
            {"rule", to_string(e.space.rule)},
            {"schedule", to_string(e.space.schedule)},
            {"coupling", to_string(e.space.coupling)},
            {"axes", axes},
            {"fixed", e.space.fixed}};
  if (e.plan) j["plan"] = plan_json(*e.plan);
  return j;
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

void StudyConfig::validate() const {
  workload.validate();
  if (budget_steps < 1) throw ConfigError("study: budget_steps must be >= 1");
  if (eval_every < 1) throw ConfigError("study: eval_every must be >= 1");
  if (statistics.empty()) throw ConfigError("study: no statistics requested");
  if (optimizers.empty()) throw ConfigError("study: no optimizers");
  if (!(boundary_margin > 0.0 && boundary_margin < 0.5)) {
    throw ConfigError("study: boundary_margin must be in (0, 0.5)");
  }
  std::set<std::string> names;
  for (const auto& e : optimizers) {
    if (e.name.empty()) throw ConfigError("study: optimizer with empty name");
    if (!names.insert(e.name).second) throw ConfigError("study: duplicate optimizer '" + e.name + "'");
    e.space.validate();
    const auto p = plan_for(e);
    p.validate();
    for (auto k : budgets_for(p)) {
      if (k < 1 || k > p.n) throw ConfigError("study: curve budget outside [1, N]");
    }
  }
}

BootstrapPlan StudyConfig::plan_for(const OptimizerEntry& e) const {
  BootstrapPlan p = e.plan.value_or(plan);
  if (!e.plan || e.plan->seed == 0) p.seed = seeds.bootstrap;
  return p;
}

std::vector<std::int64_t> StudyConfig::budgets_for(const BootstrapPlan& p) const {
  if (!curve_budgets.empty()) return curve_budgets;
  std::vector<std::int64_t> out;
  for (std::int64_t k = 1; k <= p.k; k *= 2) out.push_back(k);
  if (out.back() != p.k) out.push_back(p.k);
  return out;
}

const OptimizerEntry& StudyConfig::entry(std::string_view name) const {
  for (const auto& e : optimizers) {
    if (e.name == name) return e;
  }
  throw UsageError("no optimizer named '" + std::string(name) + "'");
}

StudyConfig parse_study_config(std::string_view text) {
  const json j = parse_text(text);
  constexpr std::string_view where = "study";
  reject_unknown_keys(j, where,
                      {"name", "workload", "budget_steps", "eval_every", "objective", "statistics",
                       "plan", "curve_budgets", "boundary_margin", "seeds", "optimizers"});
  StudyConfig c;
  c.name = get_or<std::string>(j, "name", c.name, where);
  c.workload = parse_workload(get_required<json>(j, "workload", where));
  c.budget_steps = get_required<std::int64_t>(j, "budget_steps", where);
  c.eval_every = get_or(j, "eval_every", c.eval_every, where);
  if (j.contains("objective")) {
    const auto objective = get_required<std::string>(j, "objective", where);
    std::string_view obj = objective;
    if (obj.substr(0, 6) == "final_") obj.remove_prefix(6);
    c.objective = MetricSelector::parse(obj);
  }
  for (const auto& s : get_required<std::vector<std::string>>(j, "statistics", where)) {
    c.statistics.push_back(StatisticSpec::parse(s));
  }
  if (j.contains("plan")) c.plan = parse_plan(j.at("plan"), c.plan, "study.plan");
  c.curve_budgets = get_or<std::vector<std::int64_t>>(j, "curve_budgets", {}, where);
  c.boundary_margin = get_or(j, "boundary_margin", c.boundary_margin, where);
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    reject_unknown_keys(s, "study.seeds", {"data", "search", "batch", "bootstrap"});
    c.seeds.data = get_or(s, "data", c.seeds.data, "study.seeds");
    c.seeds.search = get_or(s, "search", c.seeds.search, "study.seeds");
    c.seeds.batch = get_or(s, "batch", c.seeds.batch, "study.seeds");
    c.seeds.bootstrap = get_or(s, "bootstrap", c.seeds.bootstrap, "study.seeds");
  }
  c.workload.data_seed = c.seeds.data;
  const auto& opts = get_required<json>(j, "optimizers", where);
  if (!opts.is_array()) throw ConfigError("study: 'optimizers' must be a list");
  for (std::size_t i = 0; i < opts.size(); ++i) {
    c.optimizers.push_back(parse_entry(opts[i], "optimizers[" + std::to_string(i) + "]", true));
  }
  c.validate();
  return c;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open study config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str());
}

std::string to_json(const StudyConfig& c) {
  json stats = json::array();
  for (const auto& s : c.statistics) stats.push_back(s.to_string());
  json opts = json::array();
  for (const auto& e : c.optimizers) opts.push_back(entry_json(e));
  json j = {{"name", c.name},
            {"workload", workload_json(c.workload)},
            {"budget_steps", c.budget_steps},
            {"eval_every", c.eval_every},
            {"objective", c.objective.to_string()},
            {"statistics", stats},
            {"plan", plan_json(c.plan)},
            {"curve_budgets", c.curve_budgets},
            {"boundary_margin", c.boundary_margin},
            {"seeds",
             {{"data", c.seeds.data},
              {"search", c.seeds.search},
              {"batch", c.seeds.batch},
              {"bootstrap", c.seeds.bootstrap}}},
            {"optimizers", opts}};
  return j.dump(2);
}

std::string config_hash(const StudyConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(config))));
  return buf;
}

OptimizerEntry parse_optimizer_entry(std::string_view text) {
  return parse_entry(parse_text(text), "space", false);
}

}  // namespace optbench
