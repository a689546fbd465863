// SPDX-License-Identifier: Apache-2.0
#include "optbench/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "optbench/errors.hpp"
#include "optbench/numfmt.hpp"

namespace optbench {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::LinearDecay: return "linear_decay";
    case ScheduleKind::Explicit: return "explicit";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (auto k : {ScheduleKind::Constant, ScheduleKind::LinearDecay, ScheduleKind::Explicit}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

void ScheduleConfig::validate() const {
  if (total_steps && *total_steps < 1) throw ConfigError("schedule: total_steps must be >= 1");
  switch (kind) {
    case ScheduleKind::Constant:
      if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
        throw ConfigError("schedule: base_lr must be finite and > 0");
      }
      break;
    case ScheduleKind::LinearDecay: {
      if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
        throw ConfigError("schedule: base_lr must be finite and > 0");
      }
      if (!decay_factor || !decay_fraction || !total_steps) {
        throw ConfigError(
            "linear_decay needs decay_factor, decay_fraction and total_steps");
      }
      if (!(*decay_factor > 0.0 && *decay_factor <= 1.0)) {
        throw ConfigError("linear_decay: decay_factor " + format_double(*decay_factor) +
                          " outside (0, 1]");
      }
      if (!(*decay_fraction >= 0.0 && *decay_fraction <= 1.0)) {
        throw ConfigError("linear_decay: decay_fraction " + format_double(*decay_fraction) +
                          " outside [0, 1]");
      }
      if (decay_steps() == 0) throw ConfigError("linear_decay: zero decay steps");
      break;
    }
    case ScheduleKind::Explicit:
      if (explicit_values.empty()) throw ConfigError("explicit schedule has no values");
      for (double x : explicit_values) {
        if (!(x > 0.0) || !std::isfinite(x)) {
          throw ConfigError("explicit schedule value " + format_double(x) + " not finite and > 0");
        }
      }
      break;
  }
}

std::int64_t ScheduleConfig::decay_steps() const {
  if (kind != ScheduleKind::LinearDecay || !decay_fraction || !total_steps) return 0;
  return std::llround(*decay_fraction * static_cast<double>(*total_steps));
}

std::optional<std::int64_t> ScheduleConfig::horizon() const {
  if (kind == ScheduleKind::Explicit) return static_cast<std::int64_t>(explicit_values.size());
  return total_steps;
}

std::string ScheduleConfig::to_string() const {
  std::string out(optbench::to_string(kind));
  if (kind == ScheduleKind::Explicit) {
    return out + "(n=" + std::to_string(explicit_values.size()) + ")";
  }
  out += "(base_lr=" + format_double(base_lr);
  if (decay_factor) out += ",decay_factor=" + format_double(*decay_factor);
  if (decay_fraction) out += ",decay_fraction=" + format_double(*decay_fraction);
  if (total_steps) out += ",total_steps=" + std::to_string(*total_steps);
  return out + ")";
}

ScheduleConfig ScheduleConfig::parse(std::string_view text) {
  ScheduleConfig s;
  const auto open = text.find('(');
  s.kind = parse_schedule_kind(text.substr(0, open));
  if (s.kind == ScheduleKind::Explicit) throw ConfigError("explicit schedules have no text form");
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ConfigError("schedule text missing ')'");
    std::string_view body = text.substr(open + 1, text.size() - open - 2);
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = body.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected name=value in schedule");
      const auto key = item.substr(0, eq);
      const auto val = item.substr(eq + 1);
      if (key == "base_lr") {
        s.base_lr = parse_double(val);
      } else if (key == "decay_factor") {
        s.decay_factor = parse_double(val);
      } else if (key == "decay_fraction") {
        s.decay_fraction = parse_double(val);
      } else if (key == "total_steps") {
        s.total_steps = static_cast<std::int64_t>(parse_double(val));
      } else {
        throw ConfigError("unknown schedule field '" + std::string(key) + "'");
      }
      body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    }
  }
  s.validate();
  return s;
}

double lr_at(const ScheduleConfig& s, std::int64_t t) {
  if (t < 0) throw UsageError("lr_at: negative step");
  if (auto h = s.horizon(); h && t >= *h) {
    throw UsageError("lr_at: step " + std::to_string(t) + " beyond schedule horizon " +
                     std::to_string(*h));
  }
  switch (s.kind) {
    case ScheduleKind::Constant:
      return s.base_lr;
    case ScheduleKind::Explicit:
      return s.explicit_values[static_cast<std::size_t>(t)];
    case ScheduleKind::LinearDecay: {
      const auto d = s.decay_steps();
      if (d <= 0) throw ConfigError("linear_decay: zero decay steps");
      const double f = s.decay_factor.value();
      if (t >= d) return f * s.base_lr;
      const double frac = static_cast<double>(t) / static_cast<double>(d);
      return s.base_lr * (1.0 - (1.0 - f) * frac);
    }
  }
  return s.base_lr;
}

}  // namespace optbench
