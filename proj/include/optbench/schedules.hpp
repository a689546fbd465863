// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace optbench {

enum class ScheduleKind { Constant, LinearDecay, Explicit };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Learning-rate schedule.
///
/// LinearDecay ramps linearly from base_lr down to decay_factor * base_lr over
/// D = round(decay_fraction * total_steps) steps and stays there afterwards.
/// Explicit holds one value per step (used for time-dependent mapped rates).
struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::Constant;
  double base_lr = 0.1;
  std::optional<double> decay_factor;
  std::optional<double> decay_fraction;
  std::optional<std::int64_t> total_steps;  // horizon; optional for Constant
  std::vector<double> explicit_values;

  static ScheduleConfig constant(double lr, std::optional<std::int64_t> horizon = {}) {
    ScheduleConfig s;
    s.base_lr = lr;
    s.total_steps = horizon;
    return s;
  }
  static ScheduleConfig linear_decay(double lr, double factor, double fraction,
                                     std::int64_t total) {
    ScheduleConfig s;
    s.kind = ScheduleKind::LinearDecay;
    s.base_lr = lr;
    s.decay_factor = factor;
    s.decay_fraction = fraction;
    s.total_steps = total;
    return s;
  }
  static ScheduleConfig explicit_rates(std::vector<double> values) {
    ScheduleConfig s;
    s.kind = ScheduleKind::Explicit;
    s.base_lr = values.empty() ? 0.0 : values.front();
    s.total_steps = static_cast<std::int64_t>(values.size());
    s.explicit_values = std::move(values);
    return s;
  }

  void validate() const;

  /// Number of steps over which the rate decays (LinearDecay only).
  std::int64_t decay_steps() const;

  /// Steps the schedule is defined for; nullopt means unbounded.
  std::optional<std::int64_t> horizon() const;

  /// "constant(base_lr=0.1)", "linear_decay(base_lr=..,decay_factor=..,...)".
  /// Explicit schedules print as "explicit(n=<len>)" and do not parse back.
  std::string to_string() const;
  static ScheduleConfig parse(std::string_view text);
};

/// Learning rate used for the update that starts at step t.
/// Throws UsageError for t outside the horizon, ConfigError for an invalid
/// schedule (including D = 0).
double lr_at(const ScheduleConfig& schedule, std::int64_t t);

}  // namespace optbench
