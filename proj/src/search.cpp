// SPDX-License-Identifier: Apache-2.0
#include "optbench/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "optbench/errors.hpp"
#include "optbench/numfmt.hpp"
#include "optbench/seeding.hpp"

namespace optbench {

namespace {

constexpr double kOneBelow = 0x1.fffffffffffffp-1;  // largest double < 1

bool known_axis(std::string_view name) {
  return std::find(std::begin(kKnownAxisNames), std::end(kKnownAxisNames), name) !=
         std::end(kKnownAxisNames);
}

// Counter-based generator for digit permutations; cheap to construct.
class PermutationStream {
 public:
  explicit PermutationStream(std::uint64_t key) : state_(key) {}
  std::uint64_t next() { return mix64(state_ += 0x9e3779b97f4a7c15ULL); }

 private:
  std::uint64_t state_;
};

std::uint32_t permuted_digit(std::uint32_t digit, std::uint32_t base, std::uint64_t seed,
                             std::uint32_t axis, std::uint32_t position) {
  // Fisher-Yates over [0, base); only the image of `digit` is needed.
  thread_local std::vector<std::uint32_t> perm;
  perm.resize(base);
  std::iota(perm.begin(), perm.end(), 0u);
  PermutationStream rng(derive_seed({seed, axis, position, 0x5c4a}));
  for (std::uint32_t i = base - 1; i > 0; --i) {
    const auto j = static_cast<std::uint32_t>(rng.next() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm[digit];
}

}  // namespace

std::string_view to_string(AxisKind kind) {
  switch (kind) {
    case AxisKind::ContinuousLinear: return "linear";
    case AxisKind::ContinuousLog10: return "log10";
    case AxisKind::DiscreteSet: return "discrete";
  }
  return "?";
}

AxisKind parse_axis_kind(std::string_view name) {
  for (auto k : {AxisKind::ContinuousLinear, AxisKind::ContinuousLog10, AxisKind::DiscreteSet}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown axis kind '" + std::string(name) + "'");
}

std::string_view to_string(Coupling coupling) {
  switch (coupling) {
    case Coupling::None: return "none";
    case Coupling::EpsSqrtCoupled: return "eps_sqrt";
    case Coupling::EpsCoupled: return "eps";
  }
  return "?";
}

Coupling parse_coupling(std::string_view name) {
  for (auto c : {Coupling::None, Coupling::EpsSqrtCoupled, Coupling::EpsCoupled}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown coupling '" + std::string(name) + "'");
}

void Axis::validate() const {
  if (!known_axis(name)) throw ConfigError("unknown axis name '" + name + "'");
  if (kind == AxisKind::DiscreteSet) {
    if (values.empty()) throw ConfigError("axis '" + name + "': empty discrete set");
    return;
  }
  if (!std::isfinite(low) || !std::isfinite(high) || !(low < high)) {
    throw ConfigError("axis '" + name + "': need finite low < high");
  }
}

double Axis::decode(double u) const {
  switch (kind) {
    case AxisKind::ContinuousLinear:
      return low + u * (high - low);
    case AxisKind::ContinuousLog10:
      return std::pow(10.0, low + u * (high - low));
    case AxisKind::DiscreteSet: {
      auto idx = static_cast<std::size_t>(std::floor(u * static_cast<double>(values.size())));
      return values[std::min(idx, values.size() - 1)];
    }
  }
  return 0.0;
}

double Axis::encode(double value) const {
  switch (kind) {
    case AxisKind::ContinuousLinear:
      return (value - low) / (high - low);
    case AxisKind::ContinuousLog10:
      return (std::log10(value) - low) / (high - low);
    case AxisKind::DiscreteSet: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < values.size(); ++i) {
        if (std::abs(values[i] - value) < std::abs(values[best] - value)) best = i;
      }
      return (static_cast<double>(best) + 0.5) / static_cast<double>(values.size());
    }
  }
  return 0.0;
}

void SearchSpace::validate() const {
  std::set<std::string> names;
  for (const auto& a : axes) {
    a.validate();
    if (!names.insert(a.name).second) throw ConfigError("duplicate axis '" + a.name + "'");
  }
  for (const auto& [name, value] : fixed) {
    if (!known_axis(name)) throw ConfigError("unknown fixed hyperparameter '" + name + "'");
    if (names.count(name)) throw ConfigError("'" + name + "' is both fixed and searched");
  }
  auto provided = [&](std::string_view n) {
    return names.count(std::string(n)) || fixed.count(std::string(n));
  };
  switch (coupling) {
    case Coupling::None:
      if (provided("lr_over_eps") || provided("lr_over_sqrt_eps")) {
        throw ConfigError("coupled learning-rate axis without a coupling mode");
      }
      break;
    case Coupling::EpsCoupled:
      if (!names.count("epsilon") || !names.count("lr_over_eps")) {
        throw ConfigError("coupling 'eps' needs axes 'epsilon' and 'lr_over_eps'");
      }
      break;
    case Coupling::EpsSqrtCoupled:
      if (!names.count("epsilon") || !names.count("lr_over_sqrt_eps")) {
        throw ConfigError("coupling 'eps_sqrt' needs axes 'epsilon' and 'lr_over_sqrt_eps'");
      }
      break;
  }
  if (coupling != Coupling::None && provided("lr")) {
    throw ConfigError("'lr' cannot be set directly in a coupled space");
  }
  auto require = [&](std::string_view n, std::string_view alt = {}) {
    if (!provided(n) && (alt.empty() || !provided(alt))) {
      throw ConfigError(std::string(to_string(rule)) + " search space does not set '" +
                        std::string(n) + "'");
    }
    if (!alt.empty() && provided(n) && provided(alt)) {
      throw ConfigError("both '" + std::string(n) + "' and '" + std::string(alt) + "' given");
    }
  };
  if (coupling == Coupling::None) require("lr");
  if (uses_gamma(rule)) require("gamma", "one_minus_gamma");
  if (uses_rho(rule)) require("rho", "one_minus_rho");
  if (uses_betas(rule)) {
    require("beta1", "one_minus_beta1");
    require("beta2", "one_minus_beta2");
  }
  if (uses_epsilon(rule)) require("epsilon");
  if (schedule == ScheduleKind::LinearDecay) {
    require("decay_factor");
    require("decay_fraction");
  }
  if (schedule == ScheduleKind::Explicit) throw ConfigError("search spaces cannot use explicit schedules");
}

// -- Sampling ---------------------------------------------------------------

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  const double inv = 1.0 / base;
  double scale = inv;
  double out = 0.0;
  while (index > 0) {
    out += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return std::min(out, kOneBelow);
}

double scrambled_radical_inverse(std::uint64_t index, std::uint32_t base, std::uint64_t seed,
                                 std::uint32_t axis) {
  const double inv = 1.0 / base;
  double scale = inv;
  double out = 0.0;
  for (std::uint32_t position = 0; scale > 0x1p-60; ++position) {
    const auto digit = static_cast<std::uint32_t>(index % base);
    index /= base;
    out += static_cast<double>(permuted_digit(digit, base, seed, axis, position)) * scale;
    scale *= inv;
  }
  return std::min(out, kOneBelow);
}

std::uint32_t nth_prime(std::uint32_t axis) {
  static const std::vector<std::uint32_t> primes = [] {
    std::vector<std::uint32_t> p;
    for (std::uint32_t n = 2; p.size() < 256; ++n) {
      bool prime = true;
      for (auto q : p) {
        if (q * q > n) break;
        if (n % q == 0) {
          prime = false;
          break;
        }
      }
      if (prime) p.push_back(n);
    }
    return p;
  }();
  if (axis >= primes.size()) throw UsageError("sampler supports at most 256 axes");
  return primes[axis];
}

std::vector<double> sample_unit(std::size_t k, std::int64_t trial_index, std::uint64_t seed,
                                SamplerMode mode) {
  if (k == 0) throw UsageError("sample_unit: need at least one axis");
  if (trial_index < 0) throw UsageError("sample_unit: negative trial index");
  std::vector<double> u(k);
  const auto idx = static_cast<std::uint64_t>(trial_index);
  for (std::uint32_t a = 0; a < k; ++a) {
    u[a] = mode == SamplerMode::Reference ? radical_inverse(idx, nth_prime(a))
                                          : scrambled_radical_inverse(idx, nth_prime(a), seed, a);
  }
  return u;
}

std::vector<double> sample_unit(const SearchSpace& space, std::int64_t trial_index,
                                std::uint64_t seed, SamplerMode mode) {
  return sample_unit(space.dim(), trial_index, seed, mode);
}

// -- Decoding ---------------------------------------------------------------

namespace {

void apply_derived(const SearchSpace& space, std::map<std::string, double>& d) {
  for (auto [from, to] : {std::pair{"one_minus_gamma", "gamma"}, std::pair{"one_minus_rho", "rho"},
                          std::pair{"one_minus_beta1", "beta1"},
                          std::pair{"one_minus_beta2", "beta2"}}) {
    if (auto it = d.find(from); it != d.end()) d[to] = 1.0 - it->second;
  }
  if (space.coupling == Coupling::EpsCoupled) {
    d["lr"] = d.at("lr_over_eps") * d.at("epsilon");
  } else if (space.coupling == Coupling::EpsSqrtCoupled) {
    d["lr"] = d.at("lr_over_sqrt_eps") * std::sqrt(d.at("epsilon"));
  }
}

}  // namespace

HyperparameterPoint decode(const SearchSpace& space, const std::vector<double>& unit,
                           std::int64_t trial_index) {
  if (unit.size() != space.dim()) throw UsageError("decode: unit vector has wrong dimension");
  HyperparameterPoint p;
  p.unit = unit;
  p.trial_index = trial_index;
  p.decoded = space.fixed;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    if (!(unit[i] >= 0.0 && unit[i] < 1.0)) throw UsageError("decode: coordinate outside [0,1)");
    p.decoded[space.axes[i].name] = space.axes[i].decode(unit[i]);
  }
  apply_derived(space, p.decoded);
  try {
    // A nominal horizon; only validity of the values matters here.
    (void)settings_for(space, p, 1000);
  } catch (const ConfigError& e) {
    p.valid = false;
    p.invalid_reason = e.what();
  }
  return p;
}

std::vector<double> encode(const SearchSpace& space, const HyperparameterPoint& point) {
  std::vector<double> u(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto& axis = space.axes[i];
    auto it = point.decoded.find(axis.name);
    if (it == point.decoded.end()) throw UsageError("encode: point lacks axis '" + axis.name + "'");
    u[i] = axis.encode(it->second);
  }
  return u;
}

TrialSettings settings_for(const SearchSpace& space, const HyperparameterPoint& point,
                           std::int64_t total_steps) {
  if (!point.valid) throw ConfigError(point.invalid_reason);
  const auto& d = point.decoded;
  auto get = [&](const char* name) {
    auto it = d.find(name);
    if (it == d.end()) throw ConfigError(std::string("point lacks '") + name + "'");
    return it->second;
  };
  TrialSettings s;
  s.optimizer.rule = space.rule;
  if (uses_gamma(space.rule)) s.optimizer.gamma = get("gamma");
  if (uses_rho(space.rule)) s.optimizer.rho = get("rho");
  if (uses_betas(space.rule)) {
    s.optimizer.beta1 = get("beta1");
    s.optimizer.beta2 = get("beta2");
  }
  if (uses_epsilon(space.rule)) s.optimizer.epsilon = get("epsilon");
  s.optimizer.validate();

  const double lr = get("lr");
  if (space.schedule == ScheduleKind::LinearDecay) {
    s.schedule = ScheduleConfig::linear_decay(lr, get("decay_factor"), get("decay_fraction"),
                                              total_steps);
  } else {
    s.schedule = ScheduleConfig::constant(lr, total_steps);
  }
  s.schedule.validate();
  if (auto it = d.find("l2"); it != d.end()) {
    if (!(it->second >= 0.0)) throw ConfigError("l2 must be >= 0");
    s.l2 = it->second;
  }
  return s;
}

std::map<std::string, BoundarySide> boundary_report(const SearchSpace& space,
                                                    const std::vector<HyperparameterPoint>& points,
                                                    std::size_t best_index, double margin) {
  if (best_index >= points.size()) throw UsageError("boundary_report: best_index out of range");
  if (!(margin > 0.0 && margin < 0.5)) throw UsageError("boundary_report: margin must be in (0, 0.5)");
  const auto& unit = points[best_index].unit;
  if (unit.size() != space.dim()) throw UsageError("boundary_report: point/space mismatch");
  std::map<std::string, BoundarySide> flags;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (!space.axes[i].continuous()) continue;
    if (unit[i] < margin) {
      flags[space.axes[i].name] = BoundarySide::Low;
    } else if (unit[i] > 1.0 - margin) {
      flags[space.axes[i].name] = BoundarySide::High;
    }
  }
  return flags;
}

}  // namespace optbench
