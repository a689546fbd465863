// SPDX-License-Identifier: Apache-2.0
//
// Hyperparameter search spaces and quasi-random sampling.
//
// A space is an ordered list of axes over the unit hypercube. Each trial index
// maps to one point of a scrambled Halton sequence (one prime base per axis,
// digits permuted per (seed, axis, digit position)); the point is decoded
// axis by axis and then through the space's coupling, so e.g. Adam can be
// searched over (epsilon, alpha0/epsilon) instead of (epsilon, alpha0).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optbench/schedules.hpp"
#include "optbench/update_rules.hpp"

namespace optbench {

enum class AxisKind { ContinuousLinear, ContinuousLog10, DiscreteSet };
enum class Coupling { None, EpsSqrtCoupled, EpsCoupled };

std::string_view to_string(AxisKind kind);
AxisKind parse_axis_kind(std::string_view name);
std::string_view to_string(Coupling coupling);
Coupling parse_coupling(std::string_view name);

/// Axis names the decoder understands. "one_minus_*" axes are inverted into
/// the named hyperparameter; "lr_over_eps" / "lr_over_sqrt_eps" pair with
/// "epsilon" under the corresponding coupling.
inline constexpr std::string_view kKnownAxisNames[] = {
    "lr",          "gamma",           "one_minus_gamma", "rho",
    "one_minus_rho", "beta1",         "one_minus_beta1", "beta2",
    "one_minus_beta2", "epsilon",     "lr_over_eps",     "lr_over_sqrt_eps",
    "decay_factor", "decay_fraction", "l2"};

struct Axis {
  std::string name;
  AxisKind kind = AxisKind::ContinuousLinear;
  double low = 0.0;   // exponent for ContinuousLog10
  double high = 1.0;
  std::vector<double> values;  // DiscreteSet

  bool continuous() const noexcept { return kind != AxisKind::DiscreteSet; }
  void validate() const;

  /// Unit coordinate -> raw axis value.
  double decode(double u) const;
  /// Raw axis value -> unit coordinate (centre of the cell for discrete axes).
  double encode(double value) const;
};

struct SearchSpace {
  Rule rule = Rule::SGD;
  ScheduleKind schedule = ScheduleKind::Constant;
  Coupling coupling = Coupling::None;
  std::vector<Axis> axes;
  std::map<std::string, double> fixed;  // non-searched hyperparameters, by decoded name

  std::size_t dim() const noexcept { return axes.size(); }
  void validate() const;
};

struct HyperparameterPoint {
  std::vector<double> unit;
  std::map<std::string, double> decoded;  // raw axis values plus derived hyperparameters
  std::int64_t trial_index = 0;
  bool valid = true;
  std::string invalid_reason;
};

// -- Sampling ---------------------------------------------------------------

/// Plain radical inverse of `index` in `base` (van der Corput for base 2).
double radical_inverse(std::uint64_t index, std::uint32_t base);

/// Radical inverse with every digit (including the infinite run of leading
/// zeros past the index's own digits) sent through a seed-keyed permutation.
double scrambled_radical_inverse(std::uint64_t index, std::uint32_t base, std::uint64_t seed,
                                 std::uint32_t axis);

/// The `axis`-th prime (2, 3, 5, ...).
std::uint32_t nth_prime(std::uint32_t axis);

enum class SamplerMode { Scrambled, Reference };

/// Point `trial_index` of the k-dimensional sequence, in [0,1)^k. Reference
/// mode is the unscrambled Halton sequence and ignores `seed`.
std::vector<double> sample_unit(std::size_t k, std::int64_t trial_index, std::uint64_t seed,
                                SamplerMode mode = SamplerMode::Scrambled);
std::vector<double> sample_unit(const SearchSpace& space, std::int64_t trial_index,
                                std::uint64_t seed, SamplerMode mode = SamplerMode::Scrambled);

// -- Decoding ---------------------------------------------------------------

/// Applies scales and the coupling. Points whose hyperparameters fall outside
/// the rule's ranges come back with valid = false instead of throwing.
HyperparameterPoint decode(const SearchSpace& space, const std::vector<double>& unit,
                           std::int64_t trial_index = 0);

/// Inverse of decode on the raw axis values.
std::vector<double> encode(const SearchSpace& space, const HyperparameterPoint& point);

/// Optimizer config + schedule for a decoded point. `total_steps` is the
/// training budget (the schedule's horizon). Throws ConfigError when the point
/// is invalid.
struct TrialSettings {
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  std::optional<double> l2;
};
TrialSettings settings_for(const SearchSpace& space, const HyperparameterPoint& point,
                           std::int64_t total_steps);

// -- Boundary report --------------------------------------------------------

enum class BoundarySide { Low, High };

/// Continuous axes whose coordinate in the best point lies within `margin`
/// of 0 or 1. Discrete axes are never flagged.
std::map<std::string, BoundarySide> boundary_report(const SearchSpace& space,
                                                    const std::vector<HyperparameterPoint>& points,
                                                    std::size_t best_index, double margin);

}  // namespace optbench
