// SPDX-License-Identifier: Apache-2.0
//
// First-order update rules as pure step functions.
//
// All operations are elementwise. `t` below is the number of updates already
// completed (state.step), so the first update runs with t = 0.
//
//   SGD       theta' = theta - lr*g
//   Momentum  m' = gamma*m + g;                 theta' = theta - lr*m'
//   Nesterov  m' = gamma*m + g;                 theta' = theta - lr*(gamma*m' + g)
//   RMSProp   v' = rho*v + (1-rho)*g^2;  m' = gamma*m + lr*g/sqrt(v'+eps);
//             theta' = theta - m'
//   RMSterov  as RMSProp, theta' = theta - (gamma*m' + lr*g/sqrt(v'+eps))
//   Adam      m' = b1*m + (1-b1)*g;  v' = b2*v + (1-b2)*g^2;
//             theta' = theta - lr * (m'/(1-b1^(t+1))) / (sqrt(v'/(1-b2^(t+1))) + eps)
//   NAdam     same accumulators as Adam;
//             theta' = theta - lr * ((b1*m' + (1-b1)*g)/(1-b1^(t+1))) / (sqrt(v_hat) + eps)
//
// RMSProp/RMSterov start with v = 1, Adam/NAdam with v = 0.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace optbench {

enum class Rule { SGD, Momentum, Nesterov, RMSProp, RMSterov, Adam, NAdam };

inline constexpr Rule kAllRules[] = {Rule::SGD,     Rule::Momentum, Rule::Nesterov,
                                     Rule::RMSProp, Rule::RMSterov, Rule::Adam,
                                     Rule::NAdam};

std::string_view to_string(Rule rule);
Rule parse_rule(std::string_view name);

/// Which hyperparameters a rule reads.
bool uses_gamma(Rule rule);
bool uses_rho(Rule rule);
bool uses_betas(Rule rule);
bool uses_epsilon(Rule rule);

struct ParameterVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const ParameterVector&) const = default;
};

struct Gradient {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
};

/// A named update rule plus its hyperparameters. Fields the rule does not
/// use are ignored (and omitted from the canonical text form).
struct OptimizerConfig {
  Rule rule = Rule::SGD;
  double gamma = 0.0;
  double rho = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws ConfigError for out-of-range values of the fields `rule` uses.
  void validate() const;

  /// e.g. "adam(beta1=0.9,beta2=0.999,epsilon=1e-08)"
  std::string to_string() const;
  static OptimizerConfig parse(std::string_view text);

  static OptimizerConfig sgd() { return {}; }
  static OptimizerConfig momentum(double gamma) {
    return {.rule = Rule::Momentum, .gamma = gamma};
  }
  static OptimizerConfig nesterov(double gamma) {
    return {.rule = Rule::Nesterov, .gamma = gamma};
  }
  static OptimizerConfig rmsprop(double gamma, double rho, double epsilon) {
    return {.rule = Rule::RMSProp, .gamma = gamma, .rho = rho, .epsilon = epsilon};
  }
  static OptimizerConfig rmsterov(double gamma, double rho, double epsilon) {
    return {.rule = Rule::RMSterov, .gamma = gamma, .rho = rho, .epsilon = epsilon};
  }
  static OptimizerConfig adam(double beta1, double beta2, double epsilon) {
    return {.rule = Rule::Adam, .beta1 = beta1, .beta2 = beta2, .epsilon = epsilon};
  }
  static OptimizerConfig nadam(double beta1, double beta2, double epsilon) {
    return {.rule = Rule::NAdam, .beta1 = beta1, .beta2 = beta2, .epsilon = epsilon};
  }
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;  // empty for rules without a second moment
  std::int64_t step = 0;
};

OptimizerState init_state(const OptimizerConfig& config, std::size_t dim);

/// Applies one update in place. Throws DivergenceError (carrying the step
/// index) for a non-finite gradient or result, UsageError on dimension
/// mismatch. After a DivergenceError the contents of `theta` and `state`
/// are unspecified; use step() when the inputs must survive.
void step_in_place(const OptimizerConfig& config, OptimizerState& state,
                   std::span<double> theta, std::span<const double> grad, double lr);

/// Pure form of step_in_place.
std::pair<ParameterVector, OptimizerState> step(const OptimizerConfig& config,
                                                const OptimizerState& state,
                                                const ParameterVector& theta,
                                                const Gradient& grad, double lr);

}  // namespace optbench
