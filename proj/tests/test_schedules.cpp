#include <gtest/gtest.h>

#include <cmath>

#include "optbench/errors.hpp"
#include "optbench/schedules.hpp"
#include "support.hpp"

using namespace optbench;
using optbench::testing::Gen;
using optbench::testing::kCases;

TEST(Schedules, ConstantIgnoresStep) {
  EXPECT_EQ(lr_at(ScheduleConfig::constant(0.1), 12345), 0.1);
  EXPECT_EQ(lr_at(ScheduleConfig::constant(0.1), 0), 0.1);
}

TEST(Schedules, LinearDecayValues) {
  const auto s = ScheduleConfig::linear_decay(1.0, 0.01, 0.5, 1000);
  EXPECT_EQ(s.decay_steps(), 500);
  EXPECT_DOUBLE_EQ(lr_at(s, 0), 1.0);
  EXPECT_DOUBLE_EQ(lr_at(s, 250), 0.505);
  EXPECT_DOUBLE_EQ(lr_at(s, 500), 0.01);
  EXPECT_DOUBLE_EQ(lr_at(s, 999), 0.01);
}

TEST(Schedules, NoDecayWhenFactorIsOne) {
  const auto s = ScheduleConfig::linear_decay(0.3, 1.0, 0.7, 100);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(lr_at(s, t), 0.3);
}

TEST(Schedules, DecayStepsRoundToNearest) {
  EXPECT_EQ(ScheduleConfig::linear_decay(1, 0.1, 0.5, 7).decay_steps(), 4);  // 3.5
  EXPECT_EQ(ScheduleConfig::linear_decay(1, 0.1, 0.3, 7).decay_steps(), 2);  // 2.1
}

TEST(Schedules, MonotoneAndBounded) {
  Gen g(11);
  for (int c = 0; c < kCases; ++c) {
    const double base = g.log_uniform(-4, 1);
    const double f = g.uniform(1e-4, 1.0);
    const double frac = g.uniform(0.01, 1.0);
    const int total = g.integer(1, 3000);
    const auto s = ScheduleConfig::linear_decay(base, f, frac, total);
    if (s.decay_steps() == 0) continue;
    double prev = lr_at(s, 0);
    EXPECT_EQ(prev, base);
    for (int t = 1; t < total; ++t) {
      const double lr = lr_at(s, t);
      ASSERT_LE(lr, prev);
      ASSERT_GE(lr, f * base * (1 - 1e-15));
      prev = lr;
    }
    if (s.decay_steps() < total) {
      EXPECT_NEAR(lr_at(s, s.decay_steps()), f * base, std::nextafter(f * base, 1e300) - f * base);
    }
  }
}

TEST(Schedules, Errors) {
  EXPECT_THROW(lr_at(ScheduleConfig::linear_decay(1, 0.1, 0.5, 100), 100), UsageError);
  EXPECT_THROW(lr_at(ScheduleConfig::linear_decay(1, 0.1, 0.5, 100), -1), UsageError);
  EXPECT_THROW(lr_at(ScheduleConfig::linear_decay(1, 0.1, 0.001, 100), 0), ConfigError);
  EXPECT_THROW(ScheduleConfig::linear_decay(1, 0.0, 0.5, 100).validate(), ConfigError);
  EXPECT_THROW(ScheduleConfig::linear_decay(1, 0.5, 1.5, 100).validate(), ConfigError);
  EXPECT_THROW(ScheduleConfig::constant(-1).validate(), ConfigError);
  EXPECT_THROW(lr_at(ScheduleConfig::explicit_rates({1, 2}), 2), UsageError);
}

TEST(Schedules, ExplicitValues) {
  const auto s = ScheduleConfig::explicit_rates({0.5, 0.25, 0.125});
  EXPECT_EQ(lr_at(s, 1), 0.25);
  EXPECT_EQ(s.horizon(), 3);
}

TEST(Schedules, TextRoundTrip) {
  for (const auto& s : {ScheduleConfig::constant(0.1), ScheduleConfig::linear_decay(0.3, 0.01, 0.75, 2000)}) {
    const auto back = ScheduleConfig::parse(s.to_string());
    EXPECT_EQ(back.to_string(), s.to_string());
    EXPECT_EQ(lr_at(back, 0), lr_at(s, 0));
  }
}
