// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optbench/update_rules.hpp"

namespace optbench {

enum class WorkloadKind { Quadratic, NoisyQuadratic, LogisticRegression, TinyMLP };
enum class Split { Train, Validation, Test };

inline constexpr WorkloadKind kAllWorkloadKinds[] = {
    WorkloadKind::Quadratic, WorkloadKind::NoisyQuadratic, WorkloadKind::LogisticRegression,
    WorkloadKind::TinyMLP};
inline constexpr Split kAllSplits[] = {Split::Train, Split::Validation, Split::Test};

std::string_view to_string(WorkloadKind kind);
WorkloadKind parse_workload_kind(std::string_view name);
std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct WorkloadConfig {
  WorkloadKind kind = WorkloadKind::Quadratic;
  int dim = 10;                   // quadratics: parameter count; classifiers: input features
  int hidden = 16;                // TinyMLP hidden width
  int classes = 3;                // TinyMLP output classes
  double condition_number = 10;   // quadratics: eigenvalues log-spaced in [1, cond]
  double noise_scale = 0.0;       // NoisyQuadratic gradient noise (per coordinate std)
  double class_separation = 1.0;  // LogisticRegression: class means at +-separation/2 * e
  double label_noise = 0.0;       // TinyMLP: fraction of teacher labels flipped at random
  int n_train = 1000;
  int n_val = 500;
  int n_test = 500;
  int batch_size = 32;
  double l2 = 0.0;
  std::uint64_t data_seed = 0;

  void validate() const;
};

struct EvalRecord {
  std::int64_t step = 0;
  Split split = Split::Train;
  double loss = 0.0;
  double error = 0.0;  // classification error, or the loss for regression-style workloads
};

struct LossAndGrad {
  double loss = 0.0;
  Gradient grad;
};

/// A differentiable training problem with fixed data splits.
///
/// Instances are immutable and safe to share across threads. Mini-batch
/// selection is a deterministic function of (batch_seed, batch_index), so two
/// optimizers fed the same keys see the same data.
class Workload {
 public:
  virtual ~Workload() = default;

  const WorkloadConfig& config() const noexcept { return config_; }
  WorkloadKind kind() const noexcept { return config_.kind; }
  double l2() const noexcept { return config_.l2; }
  bool is_classifier() const noexcept {
    return kind() == WorkloadKind::LogisticRegression || kind() == WorkloadKind::TinyMLP;
  }

  virtual std::size_t param_count() const = 0;

  /// Stochastic loss and gradient for one mini-batch (noisy for NoisyQuadratic).
  LossAndGrad loss_and_grad(std::span<const double> theta, std::int64_t batch_index,
                            std::uint64_t batch_seed) const;

  /// Exact loss and gradient over the whole training split.
  LossAndGrad full_loss_and_grad(std::span<const double> theta) const;

  /// Full-split loss (including the L2 penalty) and error.
  EvalRecord evaluate(std::span<const double> theta, Split split) const;

  /// Deterministic starting point for a trial keyed by `init_seed`.
  virtual ParameterVector initial_theta(std::uint64_t init_seed) const = 0;

  /// Training example indices (into the training split) used by a batch.
  /// Empty for workloads without data.
  std::vector<std::int64_t> batch_indices(std::int64_t batch_index,
                                          std::uint64_t batch_seed) const;

  /// Stable identifiers of the examples in a split; disjoint across splits.
  virtual std::vector<std::int64_t> example_ids(Split split) const = 0;

  /// Same data, different L2 coefficient.
  virtual std::shared_ptr<const Workload> with_l2(double l2) const = 0;

 protected:
  explicit Workload(WorkloadConfig config) : config_(std::move(config)) {}

  /// Mean data loss (without L2) over the given training rows, or over the
  /// whole training split when `rows` is empty. Writes the gradient into
  /// `grad` (already zeroed, sized param_count()).
  virtual double data_loss_grad(std::span<const double> theta,
                                std::span<const std::int64_t> rows,
                                std::span<double> grad) const = 0;

  /// Mean data loss and error over a full split.
  struct LossError {
    double loss;
    double error;
  };
  virtual LossError data_loss_error(std::span<const double> theta, Split split) const = 0;
  virtual void add_noise(std::span<double> grad, std::int64_t batch_index,
                         std::uint64_t batch_seed) const;

  WorkloadConfig config_;
};

std::shared_ptr<const Workload> make_workload(const WorkloadConfig& config);

}  // namespace optbench
