#include "paradigms/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace paradigms {

NoiseSchedule::NoiseSchedule(std::vector<double> betas, SigmaConvention convention)
    : betas_(std::move(betas)), convention_(convention) {
  if (betas_.empty()) throw std::invalid_argument("noise schedule needs at least one step");
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("beta_" + std::to_string(i + 1) + " = " + std::to_string(b) +
                                  " is outside (0, 1)");
    }
  }

  const std::size_t steps = betas_.size();
  alpha_bars_.resize(steps + 1);
  alpha_bars_[0] = 1.0;
  for (std::size_t f = 1; f <= steps; ++f) alpha_bars_[f] = alpha_bars_[f - 1] * (1.0 - betas_[f - 1]);

  sigmas_.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t f = steps - t;
    const double beta = betas_[f - 1];
    const double cur = alpha_bars_[f];
    double prev = alpha_bars_[f - 1];
    if (f == 1 && convention_ == SigmaConvention::kAdjacentLevel) prev = cur;
    sigmas_[t] = std::sqrt((1.0 - prev) / (1.0 - cur) * beta);
  }
}

std::size_t NoiseSchedule::forward_index(TimeIndex t) const {
  if (t.value > num_steps()) {
    throw std::invalid_argument("time index " + std::to_string(t.value) + " outside [0, " +
                                std::to_string(num_steps()) + "]");
  }
  return num_steps() - t.value;
}

double NoiseSchedule::alpha_bar(TimeIndex t) const { return alpha_bars_[forward_index(t)]; }

double NoiseSchedule::step_beta(TimeIndex t) const {
  if (t.value >= num_steps()) {
    throw std::invalid_argument("no denoising step leaves index " + std::to_string(t.value));
  }
  return betas_[forward_index(t) - 1];
}

double NoiseSchedule::sigma(TimeIndex t) const {
  if (t.value >= num_steps()) {
    throw std::invalid_argument("no denoising step leaves index " + std::to_string(t.value));
  }
  return sigmas_[t.value];
}

double NoiseSchedule::drift_coefficient(TimeIndex t) const { return -0.5 * step_beta(t); }

double NoiseSchedule::diffusion_coefficient(TimeIndex t) const { return std::sqrt(step_beta(t)); }

NoiseSchedule build_linear_schedule(std::size_t num_steps, double beta_min, double beta_max,
                                    SigmaConvention convention) {
  if (num_steps == 0) throw std::invalid_argument("T must be at least 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw std::invalid_argument("need 0 < beta_min <= beta_max < 1");
  }
  std::vector<double> betas(num_steps);
  if (num_steps == 1) {
    betas[0] = beta_min;
  } else {
    const double step = (beta_max - beta_min) / static_cast<double>(num_steps - 1);
    for (std::size_t i = 0; i < num_steps; ++i) betas[i] = beta_min + step * static_cast<double>(i);
    betas.back() = beta_max;
  }
  return NoiseSchedule(std::move(betas), convention);
}

NoiseSchedule default_linear_schedule(std::size_t num_steps, SigmaConvention convention) {
  return build_linear_schedule(num_steps, kDefaultBetaMin, kDefaultBetaMax, convention);
}

double ddpm_sigma(const NoiseSchedule& schedule, TimeIndex t) { return schedule.sigma(t); }

MarginalParams marginal_params(const NoiseSchedule& schedule, TimeIndex t) {
  const double ab = schedule.alpha_bar(t);
  return {std::sqrt(ab), 1.0 - ab};
}

}  // namespace paradigms
