#include "paradigms/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "paradigms/random.hpp"

namespace paradigms {

NoiseArray NoiseArray::draw(std::uint64_t seed, std::span<const double> sigmas, std::size_t dim) {
  NoiseArray noise(sigmas.size(), dim);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    auto z = noise.at(i);
    fill_standard_normal(seed, Stream::kStepNoise, i, z);
    for (double& v : z) v *= sigmas[i];
  }
  return noise;
}

bool NoiseArray::all_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

Vector draw_prior(std::uint64_t seed, std::size_t dim) {
  Vector x(dim);
  fill_standard_normal(seed, Stream::kPrior, 0, x);
  return x;
}

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kDdpm: return "ddpm";
    case SamplerKind::kDdim: return "ddim";
    case SamplerKind::kHeun: return "heun";
  }
  return "?";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "ddpm") return SamplerKind::kDdpm;
  if (name == "ddim") return SamplerKind::kDdim;
  if (name == "heun") return SamplerKind::kHeun;
  throw std::invalid_argument("unknown sampler '" + std::string(name) + "' (expected ddpm, ddim or heun)");
}

DdpmRule::DdpmRule(const DriftOracle& oracle, const NoiseSchedule& schedule)
    : oracle_(oracle), schedule_(schedule) {}

void DdpmRule::advance(std::span<const double> x, std::size_t step, std::span<double> out) const {
  oracle_.denoise_mean(x, TimeIndex(step), out);
}

double DdpmRule::tolerance_sigma(std::size_t step) const { return schedule_.sigma(TimeIndex(step)); }

ProbabilityFlowRule::ProbabilityFlowRule(const DriftOracle& oracle, const NoiseSchedule& schedule,
                                         std::vector<TimeIndex> step_indices, SamplerKind kind)
    : oracle_(oracle), schedule_(schedule), indices_(std::move(step_indices)), kind_(kind) {
  if (kind_ == SamplerKind::kDdpm) throw std::invalid_argument("DDPM is not a probability-flow rule");
  if (indices_.size() < 2) throw std::invalid_argument("need at least two step indices");
  if (indices_.front().value != 0 || indices_.back().value != schedule_.num_steps()) {
    throw std::invalid_argument("step indices must start at 0 and end at T");
  }
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (!(indices_[i - 1] < indices_[i])) {
      throw std::invalid_argument("step indices must be strictly increasing (position " + std::to_string(i) + ")");
    }
  }
}

void ProbabilityFlowRule::epsilon(std::span<const double> x, TimeIndex t, std::span<double> out) const {
  oracle_.score(x, t, out);
  const double noise_scale = -std::sqrt(1.0 - schedule_.alpha_bar(t));
  for (double& v : out) v *= noise_scale;
}

void ProbabilityFlowRule::advance(std::span<const double> x, std::size_t step, std::span<double> out) const {
  const TimeIndex from = indices_.at(step);
  const TimeIndex to = indices_.at(step + 1);
  const double ab_from = schedule_.alpha_bar(from);
  const double ab_to = schedule_.alpha_bar(to);
  const double sigma_from = std::sqrt((1.0 - ab_from) / ab_from);
  const double sigma_to = std::sqrt((1.0 - ab_to) / ab_to);
  const double root_from = std::sqrt(ab_from);
  const double root_to = std::sqrt(ab_to);

  // eps in scaled coordinates: the oracle sees x = sqrt(abar) * scaled.
  Vector unscaled(x.size());
  const EpsilonFn eps = [&](std::span<const double> scaled, double sigma, std::span<double> e) {
    const bool at_from = sigma == sigma_from;
    const double root = at_from ? root_from : root_to;
    for (std::size_t d = 0; d < scaled.size(); ++d) unscaled[d] = root * scaled[d];
    epsilon(unscaled, at_from ? from : to, e);
  };

  Vector scaled(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) scaled[d] = x[d] / root_from;
  Vector next(x.size());
  if (kind_ == SamplerKind::kHeun) {
    heun_flow_step(eps, scaled, sigma_from, sigma_to, next);
  } else {
    euler_flow_step(eps, scaled, sigma_from, sigma_to, next);
  }
  if (ab_from == ab_to) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = root_to * next[d];
}

double ProbabilityFlowRule::tolerance_sigma(std::size_t step) const {
  return schedule_.sigma(indices_.at(step));
}

void euler_flow_step(const EpsilonFn& eps, std::span<const double> x, double sigma_from, double sigma_to,
                     std::span<double> out) {
  Vector e(x.size());
  eps(x, sigma_from, e);
  const double h = sigma_to - sigma_from;
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = x[d] + h * e[d];
}

void heun_flow_step(const EpsilonFn& eps, std::span<const double> x, double sigma_from, double sigma_to,
                    std::span<double> out) {
  const std::size_t n = x.size();
  Vector e1(n), e2(n), predicted(n);
  const double h = sigma_to - sigma_from;
  eps(x, sigma_from, e1);
  for (std::size_t d = 0; d < n; ++d) predicted[d] = x[d] + h * e1[d];
  eps(predicted, sigma_to, e2);
  for (std::size_t d = 0; d < n; ++d) out[d] = x[d] + h * (0.5 * (e1[d] + e2[d]));
}

std::vector<TimeIndex> uniform_step_indices(std::size_t num_train_steps, std::size_t num_steps) {
  if (num_steps == 0 || num_steps > num_train_steps) {
    throw std::invalid_argument("num_steps must be in [1, T]");
  }
  std::vector<TimeIndex> out(num_steps + 1);
  for (std::size_t k = 0; k <= num_steps; ++k) {
    out[k] = TimeIndex((k * num_train_steps + num_steps / 2) / num_steps);
  }
  return out;
}

std::unique_ptr<StepRule> make_step_rule(SamplerKind kind, const DriftOracle& oracle,
                                         const NoiseSchedule& schedule, std::size_t num_steps) {
  if (kind == SamplerKind::kDdpm) return std::make_unique<DdpmRule>(oracle, schedule);
  return std::make_unique<ProbabilityFlowRule>(oracle, schedule,
                                               uniform_step_indices(schedule.num_steps(), num_steps), kind);
}

Trajectory run_sequential(const StepRule& rule, std::span<const double> x0, const NoiseArray& noises) {
  const std::size_t n = rule.num_steps();
  const std::size_t dim = x0.size();
  if (dim != rule.dim()) throw std::invalid_argument("initial state dimension does not match the oracle");
  const bool add_noise = rule.stochastic();
  if (add_noise && (noises.size() != n || noises.dim() != dim)) {
    throw std::invalid_argument("noise array must hold " + std::to_string(n) + " vectors of dimension " +
                                std::to_string(dim));
  }
  Trajectory traj;
  traj.states.reserve(n + 1);
  traj.states.emplace_back(x0.begin(), x0.end());
  Vector image(dim);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector& x = traj.states.back();
    rule.advance(x, j, image);
    Vector next(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double drift = image[d] - x[d];
      next[d] = x[d] + drift;
      if (add_noise) next[d] += noises.at(j)[d];
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory sample_ddpm(const DriftOracle& oracle, const NoiseSchedule& schedule,
                       std::span<const double> x0, const NoiseArray& noises) {
  return run_sequential(DdpmRule(oracle, schedule), x0, noises);
}

Trajectory sample_ddim(const DriftOracle& oracle, const NoiseSchedule& schedule,
                       std::span<const double> x0, std::span<const TimeIndex> step_indices) {
  const ProbabilityFlowRule rule(oracle, schedule, {step_indices.begin(), step_indices.end()}, SamplerKind::kDdim);
  return run_sequential(rule, x0, NoiseArray{});
}

Trajectory sample_heun(const DriftOracle& oracle, const NoiseSchedule& schedule,
                       std::span<const double> x0, std::span<const TimeIndex> step_indices) {
  const ProbabilityFlowRule rule(oracle, schedule, {step_indices.begin(), step_indices.end()}, SamplerKind::kHeun);
  return run_sequential(rule, x0, NoiseArray{});
}

}  // namespace paradigms
