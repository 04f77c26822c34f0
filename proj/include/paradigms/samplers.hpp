#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "paradigms/oracle.hpp"
#include "paradigms/schedule.hpp"

namespace paradigms {

/// Pre-drawn per-step noise z_0..z_{n-1}, stored flat.
class NoiseArray {
 public:
  NoiseArray() = default;
  NoiseArray(std::size_t steps, std::size_t dim) : steps_(steps), dim_(dim), data_(steps * dim, 0.0) {}

  /// z_i ~ N(0, sigma_i^2 I), keyed by (seed, i) so consumption order never matters.
  static NoiseArray draw(std::uint64_t seed, std::span<const double> sigmas, std::size_t dim);
  static NoiseArray zeros(std::size_t steps, std::size_t dim) { return NoiseArray(steps, dim); }

  std::size_t size() const { return steps_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> at(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<double> at(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  bool all_zero() const;

 private:
  std::size_t steps_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Prior draw x_0 ~ N(0, I) for `seed`.
Vector draw_prior(std::uint64_t seed, std::size_t dim);

/// States x_0..x_n in reverse time.
struct Trajectory {
  std::vector<Vector> states;

  std::size_t num_steps() const { return states.empty() ? 0 : states.size() - 1; }
  const Vector& final_state() const { return states.back(); }
};

enum class SamplerKind { kDdpm, kDdim, kHeun };

std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(std::string_view name);

/// One sequential update rule over n steps: advance(x, j) is the noise-free
/// image of x under step j. Sequential and parallel drivers both apply it as
/// x_{j+1} = (x_j + (advance(x_j, j) - x_j)) + z_j.
class StepRule {
 public:
  virtual ~StepRule() = default;

  virtual std::size_t num_steps() const = 0;
  virtual std::size_t evals_per_step() const = 0;
  virtual bool stochastic() const = 0;
  virtual void advance(std::span<const double> x, std::size_t step, std::span<double> out) const = 0;
  /// Noise scale the stride test compares against at step j.
  virtual double tolerance_sigma(std::size_t step) const = 0;
  /// Data dimensionality.
  virtual std::size_t dim() const = 0;
};

/// Ancestral DDPM: advance = mu_theta(x, t).
class DdpmRule final : public StepRule {
 public:
  DdpmRule(const DriftOracle& oracle, const NoiseSchedule& schedule);

  std::size_t num_steps() const override { return schedule_.num_steps(); }
  std::size_t evals_per_step() const override { return 1; }
  bool stochastic() const override { return true; }
  void advance(std::span<const double> x, std::size_t step, std::span<double> out) const override;
  double tolerance_sigma(std::size_t step) const override;
  std::size_t dim() const override { return oracle_.dim(); }

 private:
  const DriftOracle& oracle_;
  const NoiseSchedule& schedule_;
};

/// Probability-flow ODE stepping over a subset of the schedule's levels.
/// kDdim is Euler (= deterministic DDIM), kHeun is the trapezoidal
/// predictor-corrector; both act on (x / sqrt(abar), sqrt((1 - abar) / abar)).
class ProbabilityFlowRule final : public StepRule {
 public:
  ProbabilityFlowRule(const DriftOracle& oracle, const NoiseSchedule& schedule,
                      std::vector<TimeIndex> step_indices, SamplerKind kind);

  std::size_t num_steps() const override { return indices_.size() - 1; }
  std::size_t evals_per_step() const override { return kind_ == SamplerKind::kHeun ? 2 : 1; }
  bool stochastic() const override { return false; }
  void advance(std::span<const double> x, std::size_t step, std::span<double> out) const override;
  /// sigma of the DDPM step at the same level.
  double tolerance_sigma(std::size_t step) const override;
  std::size_t dim() const override { return oracle_.dim(); }

  std::span<const TimeIndex> step_indices() const { return indices_; }

 private:
  void epsilon(std::span<const double> x, TimeIndex t, std::span<double> out) const;

  const DriftOracle& oracle_;
  const NoiseSchedule& schedule_;
  std::vector<TimeIndex> indices_;
  SamplerKind kind_;
};

/// Indices round(k T / n) for k = 0..n; strictly increasing, from 0 to T.
std::vector<TimeIndex> uniform_step_indices(std::size_t num_train_steps, std::size_t num_steps);

/// Sampler-level factory: DDPM uses every level; DDIM and Heun use `num_steps`
/// uniformly spaced levels.
std::unique_ptr<StepRule> make_step_rule(SamplerKind kind, const DriftOracle& oracle,
                                         const NoiseSchedule& schedule, std::size_t num_steps);

/// Runs a rule sequentially. `noises` must have num_steps() entries for
/// stochastic rules and may be empty for deterministic ones.
Trajectory run_sequential(const StepRule& rule, std::span<const double> x0, const NoiseArray& noises);

Trajectory sample_ddpm(const DriftOracle& oracle, const NoiseSchedule& schedule,
                       std::span<const double> x0, const NoiseArray& noises);
Trajectory sample_ddim(const DriftOracle& oracle, const NoiseSchedule& schedule,
                       std::span<const double> x0, std::span<const TimeIndex> step_indices);
Trajectory sample_heun(const DriftOracle& oracle, const NoiseSchedule& schedule,
                       std::span<const double> x0, std::span<const TimeIndex> step_indices);

/// Single steps of dx/dsigma = eps(x, sigma) in the scaled variables.
using EpsilonFn = std::function<void(std::span<const double> x, double sigma, std::span<double> out)>;
void euler_flow_step(const EpsilonFn& eps, std::span<const double> x, double sigma_from, double sigma_to,
                     std::span<double> out);
void heun_flow_step(const EpsilonFn& eps, std::span<const double> x, double sigma_from, double sigma_to,
                    std::span<double> out);

}  // namespace paradigms
