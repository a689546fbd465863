#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "optbench/errors.hpp"
#include "optbench/update_rules.hpp"
#include "support.hpp"

using namespace optbench;
using optbench::testing::Gen;
using optbench::testing::kCases;

namespace {

ParameterVector pv(std::vector<double> v) { return {std::move(v)}; }
Gradient gr(std::vector<double> v) { return {std::move(v)}; }

OptimizerConfig random_config(Rule rule, Gen& g) {
  switch (rule) {
    case Rule::SGD: return OptimizerConfig::sgd();
    case Rule::Momentum: return OptimizerConfig::momentum(g.uniform(0, 0.99));
    case Rule::Nesterov: return OptimizerConfig::nesterov(g.uniform(0, 0.99));
    case Rule::RMSProp:
      return OptimizerConfig::rmsprop(g.uniform(0, 0.99), g.uniform(0, 1), g.log_uniform(-10, 0));
    case Rule::RMSterov:
      return OptimizerConfig::rmsterov(g.uniform(0, 0.99), g.uniform(0, 1), g.log_uniform(-10, 0));
    case Rule::Adam:
      return OptimizerConfig::adam(g.uniform(0, 0.99), g.uniform(0, 0.999), g.log_uniform(-10, 2));
    case Rule::NAdam:
      return OptimizerConfig::nadam(g.uniform(0, 0.99), g.uniform(0, 0.999), g.log_uniform(-10, 2));
  }
  return {};
}

// Runs `steps` updates of two configs on the same gradient sequence, where the
// gradient is a fixed function of the first run's iterate. Returns the largest
// relative gap.
double paired_gap(const OptimizerConfig& a, const OptimizerConfig& b, Gen& g, int steps) {
  const std::size_t d = 4;
  auto theta_a = g.vec(d);
  auto theta_b = theta_a;
  auto sa = init_state(a, d);
  auto sb = init_state(b, d);
  const double lr = g.log_uniform(-3, -1);
  double gap = 0;
  for (int t = 0; t < steps; ++t) {
    auto grad = theta_a;  // gradient of 0.5|x|^2 plus a perturbation
    for (auto& x : grad) x += g.uniform(-0.1, 0.1);
    step_in_place(a, sa, theta_a, grad, lr);
    step_in_place(b, sb, theta_b, grad, lr);
    double scale = 1.0;
    for (std::size_t i = 0; i < d; ++i)
      scale = std::max({scale, std::abs(theta_a[i]), std::abs(theta_b[i])});
    gap = std::max(gap, optbench::testing::max_abs_diff(theta_a, theta_b) / scale);
  }
  return gap;
}

}  // namespace

TEST(UpdateRules, SgdStep) {
  auto [theta, state] = step(OptimizerConfig::sgd(), init_state(OptimizerConfig::sgd(), 2),
                             pv({1.0, -2.0}), gr({0.5, 0.5}), 0.2);
  EXPECT_DOUBLE_EQ(theta.values[0], 0.9);
  EXPECT_DOUBLE_EQ(theta.values[1], -2.1);
  EXPECT_EQ(state.step, 1);
}

TEST(UpdateRules, MomentumTwoStepsFromRest) {
  const auto cfg = OptimizerConfig::momentum(0.9);
  auto s0 = init_state(cfg, 1);
  auto [t1, s1] = step(cfg, s0, pv({0.0}), gr({1.0}), 0.1);
  EXPECT_DOUBLE_EQ(s1.m[0], 1.0);
  EXPECT_DOUBLE_EQ(t1.values[0], -0.1);
  auto [t2, s2] = step(cfg, s1, t1, gr({1.0}), 0.1);
  EXPECT_DOUBLE_EQ(s2.m[0], 1.9);
  EXPECT_NEAR(t2.values[0] - t1.values[0], -0.19, 1e-15);
}

TEST(UpdateRules, NesterovFirstStepLooksAhead) {
  const auto cfg = OptimizerConfig::nesterov(0.9);
  auto [t1, s1] = step(cfg, init_state(cfg, 1), pv({0.0}), gr({1.0}), 0.1);
  // m' = 1, update = lr * (0.9 * 1 + 1)
  EXPECT_DOUBLE_EQ(s1.m[0], 1.0);
  EXPECT_NEAR(t1.values[0], -0.19, 1e-15);
}

TEST(UpdateRules, RmspropFirstStep) {
  const auto cfg = OptimizerConfig::rmsprop(0.9, 0.99, 0.0);
  auto [t1, s1] = step(cfg, init_state(cfg, 1), pv({0.0}), gr({2.0}), 0.1);
  const double v = 0.99 * 1.0 + 0.01 * 4.0;
  EXPECT_DOUBLE_EQ(s1.v[0], v);
  EXPECT_DOUBLE_EQ(t1.values[0], -0.1 * 2.0 / std::sqrt(v));
}

TEST(UpdateRules, AdamFirstStep) {
  const auto cfg = OptimizerConfig::adam(0.9, 0.999, 1e-8);
  auto [t1, s1] = step(cfg, init_state(cfg, 1), pv({0.0}), gr({0.5}), 0.001);
  EXPECT_DOUBLE_EQ(s1.m[0], 0.05);
  EXPECT_DOUBLE_EQ(s1.v[0], 0.00025);
  EXPECT_NEAR(-t1.values[0], 0.000999999980, 1e-15);
  EXPECT_NEAR(-t1.values[0], 0.001 * 0.5 / (0.5 + 1e-8), 1e-18);
}

TEST(UpdateRules, NadamFirstStep) {
  const auto cfg = OptimizerConfig::nadam(0.9, 0.999, 1e-8);
  auto [t1, s1] = step(cfg, init_state(cfg, 1), pv({0.0}), gr({0.5}), 0.001);
  // (0.9 * 0.05 + 0.1 * 0.5) / (1 - 0.9) = 0.95; sqrt(v_hat) = 0.5
  EXPECT_NEAR(-t1.values[0], 0.001 * 0.95 / (0.5 + 1e-8), 1e-15);
}

TEST(UpdateRules, InitState) {
  auto s = init_state(OptimizerConfig::rmsprop(0.9, 0.99, 0.0), 2);
  EXPECT_EQ(s.m, (std::vector<double>{0, 0}));
  EXPECT_EQ(s.v, (std::vector<double>{1, 1}));
  EXPECT_EQ(s.step, 0);
  auto a = init_state(OptimizerConfig::adam(0.9, 0.999, 1e-8), 3);
  EXPECT_EQ(a.v, (std::vector<double>{0, 0, 0}));
  auto m = init_state(OptimizerConfig::momentum(0.5), 1);
  EXPECT_EQ(m.m, (std::vector<double>{0}));
  EXPECT_TRUE(m.v.empty());
}

TEST(UpdateRules, MomentumZeroIsSgdBitwise) {
  Gen g(1);
  for (int c = 0; c < kCases; ++c) {
    const auto theta = pv(g.vec(3));
    const auto grad = gr(g.vec(3));
    const double lr = g.log_uniform(-4, 0);
    const auto sgd = step(OptimizerConfig::sgd(), init_state(OptimizerConfig::sgd(), 3), theta, grad, lr).first;
    for (auto cfg : {OptimizerConfig::momentum(0.0), OptimizerConfig::nesterov(0.0)}) {
      EXPECT_EQ(step(cfg, init_state(cfg, 3), theta, grad, lr).first, sgd);
    }
  }
}

TEST(UpdateRules, SpecializationsAgreeOverTrajectories) {
  Gen g(2);
  for (int c = 0; c < 50; ++c) {
    const double gamma = g.uniform(0, 0.99);
    const int steps = g.integer(1, 1000);
    EXPECT_LE(paired_gap(OptimizerConfig::momentum(gamma),
                         OptimizerConfig::rmsprop(gamma, 1.0, 0.0), g, steps), 1e-12);
    EXPECT_LE(paired_gap(OptimizerConfig::nesterov(gamma),
                         OptimizerConfig::rmsterov(gamma, 1.0, 0.0), g, steps), 1e-12);
    EXPECT_EQ(paired_gap(OptimizerConfig::sgd(), OptimizerConfig::momentum(0.0), g, steps), 0.0);
    EXPECT_EQ(paired_gap(OptimizerConfig::sgd(), OptimizerConfig::nesterov(0.0), g, steps), 0.0);
  }
}

TEST(UpdateRules, ZeroGradientFixedPoint) {
  Gen g(3);
  for (int c = 0; c < kCases; ++c) {
    for (Rule rule : kAllRules) {
      const auto cfg = random_config(rule, g);
      const auto theta = pv(g.vec(5));
      auto [next, st] = step(cfg, init_state(cfg, 5), theta, gr(std::vector<double>(5, 0.0)),
                             g.log_uniform(-4, 1));
      EXPECT_EQ(next, theta) << cfg.to_string();
    }
  }
}

TEST(UpdateRules, AdamFirstStepBoundedByLr) {
  Gen g(4);
  for (int c = 0; c < kCases; ++c) {
    const auto cfg = random_config(Rule::Adam, g);
    const auto theta = pv(g.vec(6));
    const auto grad = gr(g.vec(6, -1e3, 1e3));
    const double lr = g.log_uniform(-5, 0);
    auto next = step(cfg, init_state(cfg, 6), theta, grad, lr).first;
    // Slack covers rounding of theta itself when forming the difference.
    for (std::size_t i = 0; i < 6; ++i)
      EXPECT_LE(std::abs(next.values[i] - theta.values[i]),
                lr * (1 + 1e-12) + 4 * std::numeric_limits<double>::epsilon() * std::abs(theta.values[i]));
  }
}

TEST(UpdateRules, DeterministicAndCountsSteps) {
  Gen g(5);
  for (Rule rule : kAllRules) {
    const auto cfg = random_config(rule, g);
    auto state = init_state(cfg, 3);
    auto theta = pv(g.vec(3));
    for (int t = 0; t < 20; ++t) {
      const auto grad = gr(g.vec(3));
      auto r1 = step(cfg, state, theta, grad, 0.01);
      auto r2 = step(cfg, state, theta, grad, 0.01);
      ASSERT_EQ(r1.first, r2.first);
      ASSERT_EQ(r1.second.m, r2.second.m);
      ASSERT_EQ(r1.second.v, r2.second.v);
      ASSERT_EQ(r1.second.step, state.step + 1);
      theta = r1.first;
      state = r1.second;
    }
  }
}

TEST(UpdateRules, NonFiniteGradientReportsStep) {
  const auto cfg = OptimizerConfig::momentum(0.9);
  auto state = init_state(cfg, 1);
  std::vector<double> theta{1.0};
  const std::vector<double> ok{1.0};
  step_in_place(cfg, state, theta, ok, 0.1);
  step_in_place(cfg, state, theta, ok, 0.1);
  const std::vector<double> bad{std::numeric_limits<double>::quiet_NaN()};
  try {
    step_in_place(cfg, state, theta, bad, 0.1);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 2);
  }
}

TEST(UpdateRules, OverflowIsDivergence) {
  const auto cfg = OptimizerConfig::sgd();
  auto state = init_state(cfg, 1);
  std::vector<double> theta{1e308};
  const std::vector<double> grad{-1e308};
  EXPECT_THROW(step_in_place(cfg, state, theta, grad, 10.0), DivergenceError);
}

TEST(UpdateRules, UsageErrors) {
  const auto cfg = OptimizerConfig::adam(0.9, 0.999, 1e-8);
  EXPECT_THROW(step(cfg, init_state(cfg, 2), pv({1, 2}), gr({1}), 0.1), UsageError);
  EXPECT_THROW(step(cfg, init_state(cfg, 3), pv({1, 2}), gr({1, 2}), 0.1), UsageError);
  EXPECT_THROW(step(cfg, init_state(cfg, 1), pv({1}), gr({1}), 0.0), UsageError);
}

TEST(UpdateRules, ConfigValidation) {
  EXPECT_THROW(OptimizerConfig::momentum(-0.1).validate(), ConfigError);
  EXPECT_THROW(OptimizerConfig::rmsprop(0.9, 1.5, 0.0).validate(), ConfigError);
  EXPECT_THROW(OptimizerConfig::rmsprop(0.9, 0.9, -1.0).validate(), ConfigError);
  EXPECT_THROW(OptimizerConfig::adam(1.0, 0.999, 1e-8).validate(), ConfigError);
  EXPECT_THROW(OptimizerConfig::adam(0.9, 1.0, 1e-8).validate(), ConfigError);
  EXPECT_THROW(OptimizerConfig::adam(0.9, 0.999, 0.0).validate(), ConfigError);
  EXPECT_NO_THROW(OptimizerConfig::adam(0.9, 0.0, 1e8).validate());
  EXPECT_NO_THROW(OptimizerConfig::rmsprop(0.9, 1.0, 0.0).validate());
}

TEST(UpdateRules, TextRoundTrip) {
  Gen g(6);
  for (int c = 0; c < kCases; ++c) {
    const auto cfg = random_config(kAllRules[c % 7], g);
    const auto back = OptimizerConfig::parse(cfg.to_string());
    EXPECT_EQ(back.to_string(), cfg.to_string());
    EXPECT_EQ(back.rule, cfg.rule);
    if (uses_gamma(cfg.rule)) EXPECT_EQ(back.gamma, cfg.gamma);
    if (uses_epsilon(cfg.rule)) EXPECT_EQ(back.epsilon, cfg.epsilon);
    if (uses_betas(cfg.rule)) EXPECT_EQ(back.beta2, cfg.beta2);
  }
  EXPECT_EQ(OptimizerConfig::adam(0.9, 0.999, 1e-8).to_string(),
            "adam(beta1=0.9,beta2=0.999,epsilon=1e-08)");
  EXPECT_THROW(OptimizerConfig::parse("adagrad()"), ConfigError);
}
