// SPDX-License-Identifier: Apache-2.0
#include "optbench/update_rules.hpp"

#include <cmath>
#include <map>

#include "optbench/errors.hpp"
#include "optbench/numfmt.hpp"

namespace optbench {

namespace {

bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require_range(bool ok, std::string_view rule, std::string_view field, double value,
                   std::string_view range) {
  if (!ok) {
    throw ConfigError(std::string(rule) + ": " + std::string(field) + "=" +
                      format_double(value) + " outside " + std::string(range));
  }
}

}  // namespace

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::SGD: return "sgd";
    case Rule::Momentum: return "momentum";
    case Rule::Nesterov: return "nesterov";
    case Rule::RMSProp: return "rmsprop";
    case Rule::RMSterov: return "rmsterov";
    case Rule::Adam: return "adam";
    case Rule::NAdam: return "nadam";
  }
  return "?";
}

Rule parse_rule(std::string_view name) {
  for (Rule r : kAllRules) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown update rule '" + std::string(name) + "'");
}

bool uses_gamma(Rule rule) {
  return rule == Rule::Momentum || rule == Rule::Nesterov || rule == Rule::RMSProp ||
         rule == Rule::RMSterov;
}
bool uses_rho(Rule rule) { return rule == Rule::RMSProp || rule == Rule::RMSterov; }
bool uses_betas(Rule rule) { return rule == Rule::Adam || rule == Rule::NAdam; }
bool uses_epsilon(Rule rule) { return uses_rho(rule) || uses_betas(rule); }

void OptimizerConfig::validate() const {
  const auto name = optbench::to_string(rule);
  if (uses_gamma(rule)) {
    require_range(std::isfinite(gamma) && gamma >= 0.0, name, "gamma", gamma, "[0, inf)");
  }
  if (uses_rho(rule)) {
    require_range(rho >= 0.0 && rho <= 1.0, name, "rho", rho, "[0, 1]");
    require_range(std::isfinite(epsilon) && epsilon >= 0.0, name, "epsilon", epsilon,
                  "[0, inf)");
  }
  if (uses_betas(rule)) {
    require_range(beta1 >= 0.0 && beta1 < 1.0, name, "beta1", beta1, "[0, 1)");
    // beta2 = 1 would make the second-moment bias correction 0/0.
    require_range(beta2 >= 0.0 && beta2 < 1.0, name, "beta2", beta2, "[0, 1)");
    require_range(std::isfinite(epsilon) && epsilon > 0.0, name, "epsilon", epsilon,
                  "(0, inf)");
  }
}

std::string OptimizerConfig::to_string() const {
  std::string out(optbench::to_string(rule));
  std::vector<std::pair<const char*, double>> fields;
  if (uses_gamma(rule)) fields.emplace_back("gamma", gamma);
  if (uses_rho(rule)) fields.emplace_back("rho", rho);
  if (uses_betas(rule)) {
    fields.emplace_back("beta1", beta1);
    fields.emplace_back("beta2", beta2);
  }
  if (uses_epsilon(rule)) fields.emplace_back("epsilon", epsilon);
  out += '(';
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i].first;
    out += '=';
    out += format_double(fields[i].second);
  }
  out += ')';
  return out;
}

OptimizerConfig OptimizerConfig::parse(std::string_view text) {
  OptimizerConfig cfg;
  const auto open = text.find('(');
  cfg.rule = parse_rule(text.substr(0, open));
  if (open == std::string_view::npos) {
    cfg.validate();
    return cfg;
  }
  if (text.back() != ')') throw ConfigError("optimizer text missing ')': " + std::string(text));
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  std::map<std::string, double*, std::less<>> slots;
  if (uses_gamma(cfg.rule)) slots["gamma"] = &cfg.gamma;
  if (uses_rho(cfg.rule)) slots["rho"] = &cfg.rho;
  if (uses_betas(cfg.rule)) {
    slots["beta1"] = &cfg.beta1;
    slots["beta2"] = &cfg.beta2;
  }
  if (uses_epsilon(cfg.rule)) slots["epsilon"] = &cfg.epsilon;
  while (!body.empty()) {
    const auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected name=value, got '" + std::string(item) + "'");
    auto it = slots.find(item.substr(0, eq));
    if (it == slots.end()) {
      throw ConfigError("'" + std::string(item.substr(0, eq)) + "' is not a hyperparameter of " +
                        std::string(optbench::to_string(cfg.rule)));
    }
    *it->second = parse_double(item.substr(eq + 1));
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
  }
  cfg.validate();
  return cfg;
}

OptimizerState init_state(const OptimizerConfig& config, std::size_t dim) {
  if (dim == 0) throw UsageError("init_state: dim must be >= 1");
  config.validate();
  OptimizerState state;
  state.m.assign(dim, 0.0);
  if (uses_rho(config.rule)) {
    state.v.assign(dim, 1.0);
  } else if (uses_betas(config.rule)) {
    state.v.assign(dim, 0.0);
  }
  return state;
}

void step_in_place(const OptimizerConfig& c, OptimizerState& state, std::span<double> theta,
                   std::span<const double> grad, double lr) {
  const std::size_t d = theta.size();
  if (grad.size() != d || state.m.size() != d) {
    throw UsageError("step: dimension mismatch (theta " + std::to_string(d) + ", grad " +
                     std::to_string(grad.size()) + ", state " + std::to_string(state.m.size()) +
                     ")");
  }
  if ((uses_rho(c.rule) || uses_betas(c.rule)) && state.v.size() != d) {
    throw UsageError("step: second-moment accumulator has wrong dimension");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw UsageError("step: learning rate must be finite and > 0, got " + format_double(lr));
  }
  if (!all_finite(grad)) throw DivergenceError("non-finite gradient", state.step);
  if (!all_finite(theta)) throw DivergenceError("non-finite parameters", state.step);

  auto& m = state.m;
  auto& v = state.v;
  const double t1 = static_cast<double>(state.step + 1);

  switch (c.rule) {
    case Rule::SGD:
      for (std::size_t i = 0; i < d; ++i) theta[i] -= lr * grad[i];
      break;
    case Rule::Momentum:
      for (std::size_t i = 0; i < d; ++i) {
        m[i] = c.gamma * m[i] + grad[i];
        theta[i] -= lr * m[i];
      }
      break;
    case Rule::Nesterov:
      for (std::size_t i = 0; i < d; ++i) {
        m[i] = c.gamma * m[i] + grad[i];
        theta[i] -= lr * (c.gamma * m[i] + grad[i]);
      }
      break;
    case Rule::RMSProp:
    case Rule::RMSterov: {
      const bool lookahead = c.rule == Rule::RMSterov;
      for (std::size_t i = 0; i < d; ++i) {
        const double g = grad[i];
        v[i] = c.rho * v[i] + (1.0 - c.rho) * g * g;
        // g = 0 contributes nothing even if v + eps underflows to 0.
        const double scaled = g == 0.0 ? 0.0 : lr * g / std::sqrt(v[i] + c.epsilon);
        m[i] = c.gamma * m[i] + scaled;
        theta[i] -= lookahead ? c.gamma * m[i] + scaled : m[i];
      }
      break;
    }
    case Rule::Adam:
    case Rule::NAdam: {
      const bool lookahead = c.rule == Rule::NAdam;
      const double bc1 = 1.0 - std::pow(c.beta1, t1);
      const double bc2 = 1.0 - std::pow(c.beta2, t1);
      for (std::size_t i = 0; i < d; ++i) {
        const double g = grad[i];
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
        const double numer = lookahead ? c.beta1 * m[i] + (1.0 - c.beta1) * g : m[i];
        const double denom = std::sqrt(v[i] / bc2) + c.epsilon;
        theta[i] -= lr * (numer / bc1) / denom;
      }
      break;
    }
  }
  if (!all_finite(theta)) throw DivergenceError("non-finite parameters after update", state.step);
  ++state.step;
}

std::pair<ParameterVector, OptimizerState> step(const OptimizerConfig& config,
                                                const OptimizerState& state,
                                                const ParameterVector& theta,
                                                const Gradient& grad, double lr) {
  std::pair<ParameterVector, OptimizerState> out{theta, state};
  step_in_place(config, out.second, out.first.values, grad.values, lr);
  return out;
}

}  // namespace optbench
