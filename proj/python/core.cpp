// Python bindings. Vectors cross as lists of floats; configs as small value
// classes; study results as an opaque handle with render methods.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "optbench/errors.hpp"
#include "optbench/harness.hpp"
#include "optbench/report.hpp"
#include "optbench/schedules.hpp"
#include "optbench/search.hpp"
#include "optbench/stats.hpp"
#include "optbench/study.hpp"
#include "optbench/taxonomy.hpp"
#include "optbench/update_rules.hpp"
#include "optbench/workloads.hpp"

namespace py = pybind11;
using namespace optbench;

namespace {

py::dict row_dict(const ReportRow& r) {
  py::dict d;
  d["optimizer"] = r.optimizer;
  d["statistic"] = r.statistic;
  d["mean"] = r.mean;
  d["p5"] = r.p5;
  d["p95"] = r.p95;
  d["defined_fraction"] = r.defined_fraction;
  d["n_feasible"] = r.n_feasible;
  d["n_infeasible"] = r.n_infeasible;
  return d;
}

StudyConfig study_from(const std::string& text_or_path) {
  const auto first = text_or_path.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text_or_path[first] == '{') return parse_study_config(text_or_path);
  return load_study_config(text_or_path);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimizer update rules, inclusion checks and tuning studies";
  m.attr("__version__") = kCodeVersion;

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnsupportedMapping>(m, "UnsupportedMapping", config_error.ptr());
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  py::enum_<Rule>(m, "Rule")
      .value("SGD", Rule::SGD)
      .value("MOMENTUM", Rule::Momentum)
      .value("NESTEROV", Rule::Nesterov)
      .value("RMSPROP", Rule::RMSProp)
      .value("RMSTEROV", Rule::RMSterov)
      .value("ADAM", Rule::Adam)
      .value("NADAM", Rule::NAdam);
  m.def("parse_rule", [](const std::string& s) { return parse_rule(s); });

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init([](Rule rule, double gamma, double rho, double beta1, double beta2, double epsilon) {
             OptimizerConfig c{rule, gamma, rho, beta1, beta2, epsilon};
             c.validate();
             return c;
           }),
           py::arg("rule") = Rule::SGD, py::arg("gamma") = 0.0, py::arg("rho") = 0.9,
           py::arg("beta1") = 0.9, py::arg("beta2") = 0.999, py::arg("epsilon") = 1e-8)
      .def_readwrite("rule", &OptimizerConfig::rule)
      .def_readwrite("gamma", &OptimizerConfig::gamma)
      .def_readwrite("rho", &OptimizerConfig::rho)
      .def_readwrite("beta1", &OptimizerConfig::beta1)
      .def_readwrite("beta2", &OptimizerConfig::beta2)
      .def_readwrite("epsilon", &OptimizerConfig::epsilon)
      .def("validate", &OptimizerConfig::validate)
      .def_static("parse", [](const std::string& s) { return OptimizerConfig::parse(s); })
      .def("__str__", &OptimizerConfig::to_string)
      .def("__repr__", &OptimizerConfig::to_string);

  py::class_<OptimizerState>(m, "OptimizerState")
      .def_readonly("m", &OptimizerState::m)
      .def_readonly("v", &OptimizerState::v)
      .def_readonly("step", &OptimizerState::step);
  m.def("init_state", &init_state, py::arg("config"), py::arg("dim"));
  m.def(
      "step",
      [](const OptimizerConfig& c, const OptimizerState& s, std::vector<double> theta,
         std::vector<double> grad, double lr) {
        auto [t, next] = step(c, s, ParameterVector{std::move(theta)}, Gradient{std::move(grad)}, lr);
        return py::make_tuple(t.values, next);
      },
      py::arg("config"), py::arg("state"), py::arg("theta"), py::arg("grad"), py::arg("lr"),
      "One update; returns (new_theta, new_state) and leaves the inputs alone.");

  py::class_<ScheduleConfig>(m, "Schedule")
      .def_static("constant", &ScheduleConfig::constant, py::arg("lr"), py::arg("horizon") = py::none())
      .def_static("linear_decay", &ScheduleConfig::linear_decay, py::arg("lr"), py::arg("decay_factor"),
                  py::arg("decay_fraction"), py::arg("total_steps"))
      .def_static("explicit", &ScheduleConfig::explicit_rates, py::arg("values"))
      .def_static("parse", [](const std::string& s) { return ScheduleConfig::parse(s); })
      .def("lr_at", [](const ScheduleConfig& s, std::int64_t t) { return lr_at(s, t); })
      .def("decay_steps", &ScheduleConfig::decay_steps)
      .def("__str__", &ScheduleConfig::to_string)
      .def("__repr__", &ScheduleConfig::to_string);

  m.def(
      "map_to_general",
      [](const OptimizerConfig& c, const ScheduleConfig& s, Rule target, double epsilon) {
        const auto o = map_to_general({c, s}, target, epsilon);
        return py::make_tuple(o.config, o.schedule);
      },
      py::arg("config"), py::arg("schedule"), py::arg("target"), py::arg("epsilon") = 0.0,
      "Hyperparameters (config, schedule) for `target` that reproduce the given optimizer.");

  m.def(
      "trajectory_divergence",
      [](const OptimizerConfig& ca, const ScheduleConfig& sa, const OptimizerConfig& cb,
         const ScheduleConfig& sb, const std::string& workload, std::int64_t steps, std::uint64_t seed) {
        const auto w = make_workload(builtin_workload(parse_workload_kind(workload), seed));
        const auto r = trajectory_divergence({ca, sa}, {cb, sb}, *w, w->initial_theta(seed), steps, seed);
        py::dict d;
        d["max_abs_deviation"] = r.max_abs_deviation;
        d["max_rel_deviation"] = r.max_rel_deviation;
        d["steps"] = r.steps;
        return d;
      },
      py::arg("config_a"), py::arg("schedule_a"), py::arg("config_b"), py::arg("schedule_b"),
      py::arg("workload") = "quadratic", py::arg("steps") = 200, py::arg("seed") = 0);

  m.def(
      "check_inclusions",
      [](std::uint64_t seed) {
        InclusionCheckOptions opts;
        opts.seed = seed;
        py::list out;
        for (const auto& c : check_inclusions(opts)) {
          py::dict d;
          d["special"] = std::string(to_string(c.pair.special));
          d["general"] = std::string(to_string(c.pair.general));
          d["exact"] = c.pair.exact;
          d["pass"] = c.pass;
          py::dict per;
          for (const auto& w : c.workloads) per[py::str(std::string(to_string(w.workload)))] = w.rel_deviations;
          d["rel_deviations"] = per;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0, "Runs the six inclusion checks on the built-in workloads.");

  m.def("radical_inverse", &radical_inverse, py::arg("index"), py::arg("base"));
  m.def(
      "sample_unit",
      [](std::size_t k, std::int64_t index, std::uint64_t seed, bool reference) {
        return sample_unit(k, index, seed, reference ? SamplerMode::Reference : SamplerMode::Scrambled);
      },
      py::arg("k"), py::arg("index"), py::arg("seed") = 0, py::arg("reference") = false);
  m.def(
      "sample_space",
      [](const std::string& entry_json, int n, std::uint64_t seed) {
        const auto entry = parse_optimizer_entry(entry_json);
        py::list out;
        for (int i = 0; i < n; ++i) {
          const auto p = decode(entry.space, sample_unit(entry.space, i, seed), i);
          py::dict d;
          d["unit"] = p.unit;
          d["decoded"] = p.decoded;
          d["valid"] = p.valid;
          out.append(d);
        }
        return out;
      },
      py::arg("entry_json"), py::arg("n"), py::arg("seed") = 0,
      "Decoded hyperparameters of the first n points of an optimizer's search space.");

  m.def(
      "bootstrap",
      [](std::size_t pool_size, std::int64_t k, std::int64_t b, std::uint64_t seed,
         const std::function<std::optional<double>(std::vector<std::size_t>)>& statistic) {
        const auto s = bootstrap(pool_size, {k, static_cast<std::int64_t>(pool_size), b, seed},
                                 [&](std::span<const std::size_t> idx) {
                                   return statistic({idx.begin(), idx.end()});
                                 });
        py::dict d;
        d["defined_fraction"] = s.defined_fraction;
        if (s.band) {
          d["mean"] = s.band->mean;
          d["p5"] = s.band->p5;
          d["p95"] = s.band->p95;
        } else {
          d["mean"] = py::none();
          d["p5"] = py::none();
          d["p95"] = py::none();
        }
        return d;
      },
      py::arg("pool_size"), py::arg("k"), py::arg("b"), py::arg("seed"), py::arg("statistic"),
      "Bootstrap of statistic(indices) over size-k draws without replacement from range(pool_size).");

  py::class_<StudyResult>(m, "StudyResult")
      .def_property_readonly("name", [](const StudyResult& r) { return r.config.name; })
      .def_readonly("config_hash", &StudyResult::config_hash)
      .def("rows",
           [](const StudyResult& r) {
             py::list out;
             for (const auto& row : report_rows(r)) out.append(row_dict(row));
             return out;
           })
      .def("table", &render_table)
      .def("csv", &render_csv)
      .def("curves_csv", &render_curves_csv)
      .def("svg", &render_svg)
      .def("optimizers", [](const StudyResult& r) {
        std::vector<std::string> names;
        for (const auto& o : r.optimizers) names.push_back(o.name);
        return names;
      });

  m.def(
      "run_study",
      [](const std::string& config, std::optional<std::filesystem::path> out_dir, int parallelism) {
        const auto cfg = study_from(config);
        py::gil_scoped_release release;
        return run_study(cfg, {parallelism, std::move(out_dir), {}});
      },
      py::arg("config"), py::arg("out_dir") = py::none(), py::arg("parallelism") = 1,
      "Runs a study given its JSON text or a path to it; resumes from out_dir when present.");
  m.def("load_result", &load_result, py::arg("results_dir"));
  m.def(
      "validate_study",
      [](const std::string& config) { return config_hash(study_from(config)); }, py::arg("config"),
      "Parses and validates a study config; returns its hash.");
}
