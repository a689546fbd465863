// SPDX-License-Identifier: Apache-2.0
#include "optbench/workloads.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "optbench/errors.hpp"
#include "optbench/seeding.hpp"

namespace optbench {

namespace {

constexpr std::uint64_t kBatchStream = 0xba7c4;
constexpr std::uint64_t kNoiseStream = 0x40153;
constexpr std::uint64_t kInitStream = 0x1417;

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::uint64_t split_key(Split s) { return static_cast<std::uint64_t>(s) + 1; }

// ---------------------------------------------------------------------------
// 0.5 * theta^T A theta with A = Q diag(lambda) Q^T, lambda log-spaced in
// [1, cond] and Q a seed-keyed random rotation.

class QuadraticWorkload final : public Workload {
 public:
  explicit QuadraticWorkload(WorkloadConfig config) : Workload(std::move(config)) {
    const auto d = static_cast<std::size_t>(config_.dim);
    auto rng = make_rng({config_.data_seed, 0x9a4d});
    std::normal_distribution<double> normal;
    // Gram-Schmidt on a Gaussian matrix gives a random orthogonal basis (rows).
    std::vector<double> q(d * d);
    for (auto& x : q) x = normal(rng);
    for (std::size_t i = 0; i < d; ++i) {
      double* row = &q[i * d];
      for (std::size_t j = 0; j < i; ++j) {
        const double* prev = &q[j * d];
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += row[k] * prev[k];
        for (std::size_t k = 0; k < d; ++k) row[k] -= dot * prev[k];
      }
      const double n = std::sqrt(squared_norm({row, d}));
      for (std::size_t k = 0; k < d; ++k) row[k] /= n;
    }
    a_.assign(d * d, 0.0);
    for (std::size_t e = 0; e < d; ++e) {
      const double lambda =
          d == 1 ? 1.0
                 : std::pow(config_.condition_number,
                            static_cast<double>(e) / static_cast<double>(d - 1));
      const double* qe = &q[e * d];
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) a_[i * d + j] += lambda * qe[i] * qe[j];
      }
    }
    // The rotation only perturbs A = I at rounding level; keep the identity exact.
    if (config_.condition_number == 1.0) {
      std::fill(a_.begin(), a_.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) a_[i * d + i] = 1.0;
    }
  }

  std::size_t param_count() const override { return static_cast<std::size_t>(config_.dim); }

  ParameterVector initial_theta(std::uint64_t) const override {
    const auto d = param_count();
    return {std::vector<double>(d, 1.0 / std::sqrt(static_cast<double>(d)))};
  }

  std::vector<std::int64_t> example_ids(Split) const override { return {}; }

  std::shared_ptr<const Workload> with_l2(double l2) const override {
    auto copy = std::make_shared<QuadraticWorkload>(*this);
    copy->config_.l2 = l2;
    return copy;
  }

 protected:
  double data_loss_grad(std::span<const double> theta, std::span<const std::int64_t>,
                        std::span<double> grad) const override {
    const auto d = param_count();
    double loss = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double ai = 0.0;
      const double* row = &a_[i * d];
      for (std::size_t j = 0; j < d; ++j) ai += row[j] * theta[j];
      if (!grad.empty()) grad[i] = ai;
      loss += 0.5 * theta[i] * ai;
    }
    return loss;
  }

  LossError data_loss_error(std::span<const double> theta, Split) const override {
    const double loss = data_loss_grad(theta, {}, {});
    return {loss, loss};
  }

  void add_noise(std::span<double> grad, std::int64_t batch_index,
                 std::uint64_t batch_seed) const override {
    if (config_.kind != WorkloadKind::NoisyQuadratic || config_.noise_scale == 0.0) return;
    auto rng = make_rng({batch_seed, static_cast<std::uint64_t>(batch_index), kNoiseStream});
    std::normal_distribution<double> normal(0.0, config_.noise_scale);
    for (auto& g : grad) g += normal(rng);
  }

 private:
  std::vector<double> a_;  // row-major d x d
};

// ---------------------------------------------------------------------------
// Shared storage for the classification workloads.

struct Dataset {
  int features = 0;
  std::array<std::vector<double>, 3> x;  // row-major, indexed by Split
  std::array<std::vector<int>, 3> y;

  const std::vector<double>& inputs(Split s) const { return x[static_cast<int>(s)]; }
  const std::vector<int>& labels(Split s) const { return y[static_cast<int>(s)]; }
  std::size_t size(Split s) const { return labels(s).size(); }
};

int split_size(const WorkloadConfig& c, Split s) {
  switch (s) {
    case Split::Train: return c.n_train;
    case Split::Validation: return c.n_val;
    case Split::Test: return c.n_test;
  }
  return 0;
}

std::vector<std::int64_t> ids_for(const WorkloadConfig& c, Split s) {
  std::int64_t offset = 0;
  if (s != Split::Train) offset += c.n_train;
  if (s == Split::Test) offset += c.n_val;
  std::vector<std::int64_t> ids(static_cast<std::size_t>(split_size(c, s)));
  std::iota(ids.begin(), ids.end(), offset);
  return ids;
}

std::shared_ptr<const Dataset> make_two_gaussians(const WorkloadConfig& c) {
  auto data = std::make_shared<Dataset>();
  data->features = c.dim;
  auto dir_rng = make_rng({c.data_seed, 0xd1});
  std::normal_distribution<double> normal;
  std::vector<double> mean(static_cast<std::size_t>(c.dim));
  for (auto& m : mean) m = normal(dir_rng);
  const double n = std::sqrt(squared_norm(mean));
  for (auto& m : mean) m *= 0.5 * c.class_separation / n;

  for (Split s : kAllSplits) {
    auto rng = make_rng({c.data_seed, split_key(s), 0x10f});
    const int count = split_size(c, s);
    auto& xs = data->x[static_cast<int>(s)];
    auto& ys = data->y[static_cast<int>(s)];
    xs.resize(static_cast<std::size_t>(count) * c.dim);
    ys.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int label = i % 2;
      ys[i] = label;
      const double sign = label ? 1.0 : -1.0;
      for (int k = 0; k < c.dim; ++k) {
        xs[static_cast<std::size_t>(i) * c.dim + k] = sign * mean[k] + normal(rng);
      }
    }
  }
  return data;
}

// Labels come from a fixed random teacher network (tanh, twice the student's
// width), with an optional fraction of labels resampled uniformly.
std::shared_ptr<const Dataset> make_teacher_data(const WorkloadConfig& c) {
  auto data = std::make_shared<Dataset>();
  data->features = c.dim;
  const int th = 2 * c.hidden;
  auto trng = make_rng({c.data_seed, 0x7eac});
  std::normal_distribution<double> normal;
  std::vector<double> w1(static_cast<std::size_t>(th) * c.dim), w2(static_cast<std::size_t>(c.classes) * th);
  for (auto& w : w1) w = normal(trng) * 2.0 / std::sqrt(static_cast<double>(c.dim));
  for (auto& w : w2) w = normal(trng) / std::sqrt(static_cast<double>(th));
  std::vector<double> h(static_cast<std::size_t>(th));

  for (Split s : kAllSplits) {
    auto rng = make_rng({c.data_seed, split_key(s), 0x7ea2});
    std::uniform_real_distribution<double> unif;
    std::uniform_int_distribution<int> pick(0, c.classes - 1);
    const int count = split_size(c, s);
    auto& xs = data->x[static_cast<int>(s)];
    auto& ys = data->y[static_cast<int>(s)];
    xs.resize(static_cast<std::size_t>(count) * c.dim);
    ys.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      double* xi = &xs[static_cast<std::size_t>(i) * c.dim];
      for (int k = 0; k < c.dim; ++k) xi[k] = normal(rng);
      for (int j = 0; j < th; ++j) {
        double a = 0.0;
        for (int k = 0; k < c.dim; ++k) a += w1[static_cast<std::size_t>(j) * c.dim + k] * xi[k];
        h[j] = std::tanh(a);
      }
      int best = 0;
      double best_logit = -INFINITY;
      for (int o = 0; o < c.classes; ++o) {
        double z = 0.0;
        for (int j = 0; j < th; ++j) z += w2[static_cast<std::size_t>(o) * th + j] * h[j];
        if (z > best_logit) {
          best_logit = z;
          best = o;
        }
      }
      const bool flip = unif(rng) < c.label_noise;
      const int random_label = pick(rng);
      ys[i] = flip ? random_label : best;
    }
  }
  return data;
}

class ClassifierBase : public Workload {
 public:
  std::vector<std::int64_t> example_ids(Split s) const override { return ids_for(config_, s); }

 protected:
  ClassifierBase(WorkloadConfig config, std::shared_ptr<const Dataset> data)
      : Workload(std::move(config)), data_(std::move(data)) {}

  /// Loss of one example; accumulates scale * d(loss)/d(theta) into grad when
  /// non-empty. Sets `correct` to whether the argmax prediction matches.
  virtual double example(std::span<const double> theta, const double* x, int y, double scale,
                         std::span<double> grad, bool& correct) const = 0;

  double data_loss_grad(std::span<const double> theta, std::span<const std::int64_t> rows,
                        std::span<double> grad) const override {
    const auto& xs = data_->inputs(Split::Train);
    const auto& ys = data_->labels(Split::Train);
    const int f = data_->features;
    bool correct = false;
    double loss = 0.0;
    if (rows.empty()) {
      const double scale = 1.0 / static_cast<double>(ys.size());
      for (std::size_t i = 0; i < ys.size(); ++i) {
        loss += example(theta, &xs[i * f], ys[i], scale, grad, correct);
      }
      return loss * scale;
    }
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (auto r : rows) {
      const auto i = static_cast<std::size_t>(r);
      loss += example(theta, &xs[i * f], ys[i], scale, grad, correct);
    }
    return loss * scale;
  }

  LossError data_loss_error(std::span<const double> theta, Split s) const override {
    const auto& xs = data_->inputs(s);
    const auto& ys = data_->labels(s);
    const int f = data_->features;
    double loss = 0.0;
    std::size_t wrong = 0;
    bool correct = false;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      loss += example(theta, &xs[i * f], ys[i], 0.0, {}, correct);
      if (!correct) ++wrong;
    }
    const double n = static_cast<double>(ys.size());
    return {loss / n, static_cast<double>(wrong) / n};
  }

  std::shared_ptr<const Dataset> data_;
};

// ---------------------------------------------------------------------------
// Binary logistic regression; parameters are (w_1..w_d, b).

class LogisticWorkload final : public ClassifierBase {
 public:
  explicit LogisticWorkload(WorkloadConfig config)
      : ClassifierBase(config, make_two_gaussians(config)) {}

  std::size_t param_count() const override { return static_cast<std::size_t>(config_.dim) + 1; }

  ParameterVector initial_theta(std::uint64_t) const override {
    return {std::vector<double>(param_count(), 0.0)};
  }

  std::shared_ptr<const Workload> with_l2(double l2) const override {
    auto copy = std::make_shared<LogisticWorkload>(*this);
    copy->config_.l2 = l2;
    return copy;
  }

 protected:
  double example(std::span<const double> theta, const double* x, int y, double scale,
                 std::span<double> grad, bool& correct) const override {
    const int d = config_.dim;
    double z = theta[d];
    for (int k = 0; k < d; ++k) z += theta[k] * x[k];
    correct = (z > 0.0) == (y == 1);
    // log(1 + e^z) - y z, computed stably.
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    if (!grad.empty()) {
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      const double r = scale * (p - y);
      for (int k = 0; k < d; ++k) grad[k] += r * x[k];
      grad[d] += r;
    }
    return softplus - y * z;
  }
};

// ---------------------------------------------------------------------------
// One tanh hidden layer and a softmax output.
// Layout: W1 (hidden x dim), b1 (hidden), W2 (classes x hidden), b2 (classes).

class TinyMlpWorkload final : public ClassifierBase {
 public:
  explicit TinyMlpWorkload(WorkloadConfig config)
      : ClassifierBase(config, make_teacher_data(config)) {}

  std::size_t param_count() const override {
    const auto d = static_cast<std::size_t>(config_.dim);
    const auto h = static_cast<std::size_t>(config_.hidden);
    const auto c = static_cast<std::size_t>(config_.classes);
    return h * d + h + c * h + c;
  }

  ParameterVector initial_theta(std::uint64_t init_seed) const override {
    const int d = config_.dim, h = config_.hidden, c = config_.classes;
    ParameterVector theta{std::vector<double>(param_count(), 0.0)};
    auto rng = make_rng({init_seed, kInitStream});
    std::normal_distribution<double> normal;
    auto& v = theta.values;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (int i = 0; i < h * d; ++i) v[i] = s1 * normal(rng);
    const std::size_t w2 = static_cast<std::size_t>(h) * d + h;
    for (int i = 0; i < c * h; ++i) v[w2 + i] = s2 * normal(rng);
    return theta;
  }

  std::shared_ptr<const Workload> with_l2(double l2) const override {
    auto copy = std::make_shared<TinyMlpWorkload>(*this);
    copy->config_.l2 = l2;
    return copy;
  }

 protected:
  double example(std::span<const double> theta, const double* x, int y, double scale,
                 std::span<double> grad, bool& correct) const override {
    const int d = config_.dim, h = config_.hidden, c = config_.classes;
    const double* w1 = theta.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(c) * h;

    // Small fixed-size scratch; widths are desk-scale.
    thread_local std::vector<double> act, logits, dact;
    act.resize(h);
    logits.resize(c);
    for (int j = 0; j < h; ++j) {
      double a = b1[j];
      const double* row = w1 + static_cast<std::size_t>(j) * d;
      for (int k = 0; k < d; ++k) a += row[k] * x[k];
      act[j] = std::tanh(a);
    }
    double zmax = -INFINITY;
    int argmax = 0;
    for (int o = 0; o < c; ++o) {
      double z = b2[o];
      const double* row = w2 + static_cast<std::size_t>(o) * h;
      for (int j = 0; j < h; ++j) z += row[j] * act[j];
      logits[o] = z;
      if (z > zmax) {
        zmax = z;
        argmax = o;
      }
    }
    correct = argmax == y;
    double denom = 0.0;
    for (int o = 0; o < c; ++o) denom += std::exp(logits[o] - zmax);
    const double log_denom = std::log(denom) + zmax;
    const double loss = log_denom - logits[y];
    if (grad.empty()) return loss;

    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + static_cast<std::size_t>(h) * d;
    double* g_w2 = g_b1 + h;
    double* g_b2 = g_w2 + static_cast<std::size_t>(c) * h;
    dact.assign(h, 0.0);
    for (int o = 0; o < c; ++o) {
      const double dz = scale * (std::exp(logits[o] - log_denom) - (o == y ? 1.0 : 0.0));
      g_b2[o] += dz;
      const double* row = w2 + static_cast<std::size_t>(o) * h;
      double* grow = g_w2 + static_cast<std::size_t>(o) * h;
      for (int j = 0; j < h; ++j) {
        grow[j] += dz * act[j];
        dact[j] += dz * row[j];
      }
    }
    for (int j = 0; j < h; ++j) {
      const double da = dact[j] * (1.0 - act[j] * act[j]);
      g_b1[j] += da;
      double* grow = g_w1 + static_cast<std::size_t>(j) * d;
      for (int k = 0; k < d; ++k) grow[k] += da * x[k];
    }
    return loss;
  }
};

}  // namespace

std::string_view to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Quadratic: return "quadratic";
    case WorkloadKind::NoisyQuadratic: return "noisy_quadratic";
    case WorkloadKind::LogisticRegression: return "logistic_regression";
    case WorkloadKind::TinyMLP: return "tiny_mlp";
  }
  return "?";
}

WorkloadKind parse_workload_kind(std::string_view name) {
  for (auto k : kAllWorkloadKinds) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown workload kind '" + std::string(name) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  for (auto s : kAllSplits) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

void WorkloadConfig::validate() const {
  if (dim < 1) throw ConfigError("workload: dim must be >= 1");
  if (kind == WorkloadKind::TinyMLP && (hidden < 1 || classes < 2)) {
    throw ConfigError("workload: tiny_mlp needs hidden >= 1 and classes >= 2");
  }
  if (!(condition_number >= 1.0) || !std::isfinite(condition_number)) {
    throw ConfigError("workload: condition_number must be >= 1");
  }
  if (!(noise_scale >= 0.0)) throw ConfigError("workload: noise_scale must be >= 0");
  if (!(l2 >= 0.0)) throw ConfigError("workload: l2 must be >= 0");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw ConfigError("workload: label_noise must be in [0, 1]");
  }
  if (n_train < 1 || n_val < 1 || n_test < 1) throw ConfigError("workload: split sizes must be >= 1");
  if (batch_size < 1 || batch_size > n_train) {
    throw ConfigError("workload: batch_size must be in [1, n_train]");
  }
}

LossAndGrad Workload::loss_and_grad(std::span<const double> theta, std::int64_t batch_index,
                                    std::uint64_t batch_seed) const {
  if (theta.size() != param_count()) throw UsageError("loss_and_grad: theta has wrong dimension");
  LossAndGrad out{0.0, {std::vector<double>(param_count(), 0.0)}};
  const auto rows = batch_indices(batch_index, batch_seed);
  out.loss = data_loss_grad(theta, rows, out.grad.values);
  add_noise(out.grad.values, batch_index, batch_seed);
  if (config_.l2 > 0.0) {
    out.loss += 0.5 * config_.l2 * squared_norm(theta);
    for (std::size_t i = 0; i < theta.size(); ++i) out.grad.values[i] += config_.l2 * theta[i];
  }
  if (!std::isfinite(out.loss)) throw DivergenceError("non-finite training loss", batch_index);
  return out;
}

LossAndGrad Workload::full_loss_and_grad(std::span<const double> theta) const {
  if (theta.size() != param_count()) throw UsageError("full_loss_and_grad: wrong dimension");
  LossAndGrad out{0.0, {std::vector<double>(param_count(), 0.0)}};
  out.loss = data_loss_grad(theta, {}, out.grad.values);
  if (config_.l2 > 0.0) {
    out.loss += 0.5 * config_.l2 * squared_norm(theta);
    for (std::size_t i = 0; i < theta.size(); ++i) out.grad.values[i] += config_.l2 * theta[i];
  }
  return out;
}

EvalRecord Workload::evaluate(std::span<const double> theta, Split split) const {
  if (theta.size() != param_count()) throw UsageError("evaluate: theta has wrong dimension");
  auto [loss, error] = data_loss_error(theta, split);
  const double penalty = config_.l2 > 0.0 ? 0.5 * config_.l2 * squared_norm(theta) : 0.0;
  loss += penalty;
  if (!is_classifier()) error = loss;
  return {0, split, loss, error};
}

std::vector<std::int64_t> Workload::batch_indices(std::int64_t batch_index,
                                                  std::uint64_t batch_seed) const {
  if (!is_classifier()) return {};
  auto rng = make_rng({batch_seed, static_cast<std::uint64_t>(batch_index), kBatchStream});
  std::uniform_int_distribution<std::int64_t> pick(0, config_.n_train - 1);
  std::vector<std::int64_t> rows(static_cast<std::size_t>(config_.batch_size));
  for (auto& r : rows) r = pick(rng);
  return rows;
}

void Workload::add_noise(std::span<double>, std::int64_t, std::uint64_t) const {}

std::shared_ptr<const Workload> make_workload(const WorkloadConfig& config) {
  config.validate();
  switch (config.kind) {
    case WorkloadKind::Quadratic:
    case WorkloadKind::NoisyQuadratic:
      return std::make_shared<QuadraticWorkload>(config);
    case WorkloadKind::LogisticRegression:
      return std::make_shared<LogisticWorkload>(config);
    case WorkloadKind::TinyMLP:
      return std::make_shared<TinyMlpWorkload>(config);
  }
  throw ConfigError("unknown workload kind");
}

}  // namespace optbench
