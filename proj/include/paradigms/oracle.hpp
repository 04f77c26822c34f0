#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "paradigms/schedule.hpp"

namespace paradigms {

using Vector = std::vector<double>;

struct MixtureComponent {
  double weight = 1.0;
  Vector mean;
  Vector variance;  // diagonal
};

/// Gaussian mixture with diagonal covariances, used as the data distribution q(x_0).
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return components_.size(); }
  const MixtureComponent& component(std::size_t i) const { return components_[i]; }
  std::span<const MixtureComponent> components() const { return components_; }

  /// log q(x) for the noised marginal sum_i w_i N(sqrt(ab) mu_i, ab * Sigma_i + (1 - ab) I).
  double log_density(std::span<const double> x, double alpha_bar) const;
  /// Gradient of log_density with respect to x.
  void score(std::span<const double> x, double alpha_bar, std::span<double> out) const;
  /// Posterior component probabilities under the noised marginal.
  void responsibilities(std::span<const double> x, double alpha_bar, std::span<double> out) const;

  Vector mean() const;
  /// Row-major D x D covariance of the data distribution.
  std::vector<double> covariance() const;

  /// Exact draw number `index` from the data distribution for `seed`.
  Vector sample(std::uint64_t seed, std::uint64_t index) const;
  std::vector<Vector> sample_many(std::uint64_t seed, std::size_t count) const;

 private:
  // Per-component log-weight plus log-normal-density terms at x, and the noised variances.
  void component_log_terms(std::span<const double> x, double alpha_bar, std::span<double> log_terms) const;

  std::vector<MixtureComponent> components_;
  std::size_t dim_ = 0;
};

/// Two equal-weight unit-variance components at (+2, 0, ...) and (-2, 0, ...).
GaussianMixture standard_test_mixture(std::size_t dim = 2);

/// grad_x log q_t(x) at reverse index t.
Vector analytic_score(const GaussianMixture& mixture, const NoiseSchedule& schedule,
                      std::span<const double> x, TimeIndex t);

/// DDPM denoising mean from a score: (x + beta * score) / sqrt(1 - beta).
Vector denoise_mean(std::span<const double> score, std::span<const double> x,
                    const NoiseSchedule& schedule, TimeIndex t);
void denoise_mean(std::span<const double> score, std::span<const double> x,
                  const NoiseSchedule& schedule, TimeIndex t, std::span<double> out);

/// Evaluator of the learned score / denoising mean with an evaluation counter.
///
/// Evaluation is a pure function of (x, t) and may run from many threads at
/// once. The counter grows by one per evaluated (x, t) pair.
class DriftOracle {
 public:
  DriftOracle(const NoiseSchedule& schedule, std::size_t dim) : schedule_(schedule), dim_(dim) {}
  virtual ~DriftOracle() = default;

  DriftOracle(const DriftOracle&) = delete;
  DriftOracle& operator=(const DriftOracle&) = delete;

  std::size_t dim() const { return dim_; }
  const NoiseSchedule& schedule() const { return schedule_; }

  void score(std::span<const double> x, TimeIndex t, std::span<double> out) const;
  /// Batched score: `xs` holds times.size() rows of length dim().
  void score_batch(std::span<const double> xs, std::span<const TimeIndex> times,
                   std::span<double> out) const;
  /// mu_theta(x, t); one evaluation.
  void denoise_mean(std::span<const double> x, TimeIndex t, std::span<double> out) const;

  std::uint64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }
  void reset_evaluations() { evaluations_.store(0, std::memory_order_relaxed); }

 protected:
  virtual void evaluate_score(std::span<const double> x, TimeIndex t, std::span<double> out) const = 0;

 private:
  void check_dims(std::size_t n) const;

  NoiseSchedule schedule_;
  std::size_t dim_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

/// Exact-score oracle for a Gaussian mixture; the "pretrained model" is perfect.
class MixtureOracle final : public DriftOracle {
 public:
  MixtureOracle(GaussianMixture mixture, const NoiseSchedule& schedule,
                std::chrono::microseconds eval_cost = std::chrono::microseconds{0});

  const GaussianMixture& mixture() const { return mixture_; }

 protected:
  void evaluate_score(std::span<const double> x, TimeIndex t, std::span<double> out) const override;

 private:
  GaussianMixture mixture_;
  // Simulated per-evaluation latency, for demonstrating hardware efficiency.
  std::chrono::microseconds eval_cost_;
};

/// Oracle defined by an arbitrary score function (tests, toy drifts).
class FunctionOracle final : public DriftOracle {
 public:
  using ScoreFn = std::function<void(std::span<const double>, TimeIndex, std::span<double>)>;

  FunctionOracle(const NoiseSchedule& schedule, std::size_t dim, ScoreFn fn)
      : DriftOracle(schedule, dim), fn_(std::move(fn)) {}

 protected:
  void evaluate_score(std::span<const double> x, TimeIndex t, std::span<double> out) const override {
    fn_(x, t, out);
  }

 private:
  ScoreFn fn_;
};

MixtureOracle counting_oracle(const GaussianMixture& mixture, const NoiseSchedule& schedule);

}  // namespace paradigms
