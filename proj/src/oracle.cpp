#include "paradigms/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "paradigms/random.hpp"

namespace paradigms {
namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(got) +
                                " does not match " + std::to_string(want));
  }
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("mixture needs at least one component");
  dim_ = components_.front().mean.size();
  if (dim_ == 0) throw std::invalid_argument("mixture dimension must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    const std::string tag = "component " + std::to_string(i);
    if (c.mean.size() != dim_ || c.variance.size() != dim_) {
      throw std::invalid_argument(tag + ": mean and variance must both have dimension " + std::to_string(dim_));
    }
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw std::invalid_argument(tag + ": weight must be >= 0");
    for (double v : c.variance) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(tag + ": variances must be > 0");
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) throw std::invalid_argument(tag + ": mean must be finite");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
}

void GaussianMixture::component_log_terms(std::span<const double> x, double alpha_bar,
                                          std::span<double> log_terms) const {
  const double scale = std::sqrt(alpha_bar);
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    double acc = c.weight > 0.0 ? std::log(c.weight) : -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < dim_; ++d) {
      const double var = alpha_bar * c.variance[d] + (1.0 - alpha_bar);
      const double diff = x[d] - scale * c.mean[d];
      acc -= 0.5 * (diff * diff / var + std::log(2.0 * std::numbers::pi * var));
    }
    log_terms[i] = acc;
  }
}

double GaussianMixture::log_density(std::span<const double> x, double alpha_bar) const {
  require_dim(x.size(), dim_, "log_density");
  std::vector<double> terms(components_.size());
  component_log_terms(x, alpha_bar, terms);
  return log_sum_exp(terms);
}

void GaussianMixture::responsibilities(std::span<const double> x, double alpha_bar,
                                       std::span<double> out) const {
  require_dim(x.size(), dim_, "responsibilities");
  component_log_terms(x, alpha_bar, out);
  const double norm = log_sum_exp(out);
  for (double& r : out) r = std::exp(r - norm);
}

void GaussianMixture::score(std::span<const double> x, double alpha_bar, std::span<double> out) const {
  require_dim(x.size(), dim_, "score");
  require_dim(out.size(), dim_, "score output");
  std::vector<double> resp(components_.size());
  responsibilities(x, alpha_bar, resp);
  const double scale = std::sqrt(alpha_bar);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (resp[i] == 0.0) continue;
    const auto& c = components_[i];
    for (std::size_t d = 0; d < dim_; ++d) {
      const double var = alpha_bar * c.variance[d] + (1.0 - alpha_bar);
      out[d] -= resp[i] * (x[d] - scale * c.mean[d]) / var;
    }
  }
}

Vector GaussianMixture::mean() const {
  Vector m(dim_, 0.0);
  for (const auto& c : components_) {
    for (std::size_t d = 0; d < dim_; ++d) m[d] += c.weight * c.mean[d];
  }
  return m;
}

std::vector<double> GaussianMixture::covariance() const {
  const Vector mu = mean();
  std::vector<double> cov(dim_ * dim_, 0.0);
  for (const auto& c : components_) {
    for (std::size_t a = 0; a < dim_; ++a) {
      for (std::size_t b = 0; b < dim_; ++b) {
        double second = (c.mean[a] - mu[a]) * (c.mean[b] - mu[b]);
        if (a == b) second += c.variance[a];
        cov[a * dim_ + b] += c.weight * second;
      }
    }
  }
  return cov;
}

Vector GaussianMixture::sample(std::uint64_t seed, std::uint64_t index) const {
  const double u = uniform_at(seed, Stream::kData, index, 0);
  std::size_t pick = components_.size() - 1;
  double cdf = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    cdf += components_[i].weight;
    if (u < cdf) {
      pick = i;
      break;
    }
  }
  // Offset the step so the noise block never overlaps the component-choice block.
  Vector x(dim_);
  fill_standard_normal(seed, Stream::kData, index | (std::uint64_t{1} << 63), x);
  const auto& c = components_[pick];
  for (std::size_t d = 0; d < dim_; ++d) x[d] = c.mean[d] + std::sqrt(c.variance[d]) * x[d];
  return x;
}

std::vector<Vector> GaussianMixture::sample_many(std::uint64_t seed, std::size_t count) const {
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(seed, i));
  return out;
}

GaussianMixture standard_test_mixture(std::size_t dim) {
  Vector plus(dim, 0.0), minus(dim, 0.0);
  plus[0] = 2.0;
  minus[0] = -2.0;
  return GaussianMixture({{0.5, plus, Vector(dim, 1.0)}, {0.5, minus, Vector(dim, 1.0)}});
}

Vector analytic_score(const GaussianMixture& mixture, const NoiseSchedule& schedule,
                      std::span<const double> x, TimeIndex t) {
  Vector out(mixture.dim());
  mixture.score(x, schedule.alpha_bar(t), out);
  return out;
}

void denoise_mean(std::span<const double> score, std::span<const double> x,
                  const NoiseSchedule& schedule, TimeIndex t, std::span<double> out) {
  require_dim(score.size(), x.size(), "denoise_mean");
  require_dim(out.size(), x.size(), "denoise_mean output");
  const double beta = schedule.step_beta(t);
  const double inv_root = 1.0 / std::sqrt(1.0 - beta);
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] + beta * score[d]) * inv_root;
}

Vector denoise_mean(std::span<const double> score, std::span<const double> x,
                    const NoiseSchedule& schedule, TimeIndex t) {
  Vector out(x.size());
  denoise_mean(score, x, schedule, t, out);
  return out;
}

void DriftOracle::check_dims(std::size_t n) const { require_dim(n, dim_, "oracle"); }

void DriftOracle::score(std::span<const double> x, TimeIndex t, std::span<double> out) const {
  check_dims(x.size());
  check_dims(out.size());
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  evaluate_score(x, t, out);
}

void DriftOracle::score_batch(std::span<const double> xs, std::span<const TimeIndex> times,
                              std::span<double> out) const {
  require_dim(xs.size(), times.size() * dim_, "oracle batch");
  require_dim(out.size(), times.size() * dim_, "oracle batch output");
  evaluations_.fetch_add(times.size(), std::memory_order_relaxed);
  for (std::size_t i = 0; i < times.size(); ++i) {
    evaluate_score(xs.subspan(i * dim_, dim_), times[i], out.subspan(i * dim_, dim_));
  }
}

void DriftOracle::denoise_mean(std::span<const double> x, TimeIndex t, std::span<double> out) const {
  Vector s(dim_);
  score(x, t, s);
  paradigms::denoise_mean(s, x, schedule_, t, out);
}

MixtureOracle::MixtureOracle(GaussianMixture mixture, const NoiseSchedule& schedule,
                             std::chrono::microseconds eval_cost)
    : DriftOracle(schedule, mixture.dim()), mixture_(std::move(mixture)), eval_cost_(eval_cost) {}

void MixtureOracle::evaluate_score(std::span<const double> x, TimeIndex t, std::span<double> out) const {
  if (eval_cost_.count() > 0) std::this_thread::sleep_for(eval_cost_);
  mixture_.score(x, schedule().alpha_bar(t), out);
}

MixtureOracle counting_oracle(const GaussianMixture& mixture, const NoiseSchedule& schedule) {
  return MixtureOracle(mixture, schedule);
}

}  // namespace paradigms
