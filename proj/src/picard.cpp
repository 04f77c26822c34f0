#include "paradigms/picard.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

#include "paradigms/worker_pool.hpp"

namespace paradigms {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

void guard_state(std::span<const double> x, std::size_t iteration, std::size_t index) {
  double sq = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericalDivergence(iteration, index, "non-finite state");
    sq += v * v;
  }
  const double bound = kDivergenceBound * std::sqrt(static_cast<double>(x.size()));
  if (std::sqrt(sq) > bound) throw NumericalDivergence(iteration, index, "state norm exceeds divergence bound");
}

}  // namespace

NumericalDivergence::NumericalDivergence(std::size_t iteration, std::size_t index, const std::string& detail)
    : std::runtime_error("numerical divergence at iteration " + std::to_string(iteration) + ", index " +
                         std::to_string(index) + ": " + detail),
      iteration_(iteration),
      index_(index) {}

IterationLimitExceeded::IterationLimitExceeded(std::size_t limit, std::vector<std::size_t> stride_trace)
    : std::runtime_error("sliding window did not finish within " + std::to_string(limit) + " iterations"),
      limit_(limit),
      stride_trace_(std::move(stride_trace)) {}

PicardFullResult picard_full(const OdeDrift& drift, std::span<const double> x0, std::size_t num_steps,
                             const PicardFullOptions& options) {
  if (num_steps == 0) throw std::invalid_argument("T must be at least 1");
  if (!(options.stop_tol >= 0.0)) throw std::invalid_argument("stop_tol must be >= 0");
  const std::size_t dim = x0.size();
  const std::size_t limit =
      options.max_iterations == 0 ? num_steps : std::min(options.max_iterations, num_steps);
  const double dt = static_cast<double>(num_steps);

  std::vector<double> current((num_steps + 1) * dim);
  for (std::size_t i = 0; i <= num_steps; ++i) std::copy(x0.begin(), x0.end(), current.begin() + i * dim);
  std::vector<double> next(current.size());
  std::vector<double> drifts(num_steps * dim);
  WorkerPool pool(options.workers);

  auto row = [dim](std::vector<double>& v, std::size_t i) { return std::span<double>(v.data() + i * dim, dim); };

  std::size_t iterations = 0;
  while (iterations < limit) {
    ++iterations;
    pool.parallel_for(num_steps, [&](std::size_t i) {
      drift(row(current, i), static_cast<double>(i) / dt, row(drifts, i));
    });
    // Ordered prefix sum.
    std::copy(x0.begin(), x0.end(), next.begin());
    double max_change = 0.0;
    for (std::size_t i = 0; i < num_steps; ++i) {
      auto prev = row(next, i);
      auto out = row(next, i + 1);
      auto s = row(drifts, i);
      for (std::size_t d = 0; d < dim; ++d) out[d] = prev[d] + s[d] / dt;
      guard_state(out, iterations, i + 1);
      max_change = std::max(max_change, std::sqrt(squared_distance(out, row(current, i + 1))));
    }
    current.swap(next);
    if (max_change <= options.stop_tol) break;
  }
  if (iterations > num_steps) throw std::logic_error("Picard iteration exceeded the K <= T bound");

  PicardFullResult result;
  result.iterations = iterations;
  result.trajectory.states.reserve(num_steps + 1);
  for (std::size_t i = 0; i <= num_steps; ++i) {
    auto r = row(current, i);
    result.trajectory.states.emplace_back(r.begin(), r.end());
  }
  return result;
}

TrajectoryWindow::TrajectoryWindow(std::size_t size, std::span<const double> x0)
    : size_(size), dim_(x0.size()), states_((size + 1) * x0.size()), drifts_(size * x0.size()) {
  if (size == 0) throw std::invalid_argument("window size must be at least 1");
  for (std::size_t o = 0; o <= size; ++o) std::copy(x0.begin(), x0.end(), states_.begin() + o * dim_);
}

void TrajectoryWindow::slide(std::size_t stride, std::size_t horizon) {
  if (stride == 0 || stride > size_) throw std::invalid_argument("stride must be in [1, window size]");
  const std::size_t new_base = base_ + stride;
  if (new_base > horizon) throw std::invalid_argument("window slid past the horizon");
  const std::size_t new_size = std::min(size_, horizon - new_base);
  const std::size_t kept = size_ - stride + 1;  // old offsets [stride, size]
  std::copy(states_.begin() + stride * dim_, states_.begin() + (size_ + 1) * dim_, states_.begin());
  const std::vector<double> edge(states_.begin() + (kept - 1) * dim_, states_.begin() + kept * dim_);
  states_.resize((new_size + 1) * dim_);
  for (std::size_t o = kept; o <= new_size; ++o) std::copy(edge.begin(), edge.end(), states_.begin() + o * dim_);
  base_ = new_base;
  size_ = new_size;
}

std::size_t compute_stride(std::span<const double> errors, std::span<const double> tolerances, std::size_t p) {
  if (p == 0) throw std::invalid_argument("window size must be at least 1");
  if (errors.size() != p - 1 || tolerances.size() != p - 1) {
    throw std::invalid_argument("compute_stride expects " + std::to_string(p - 1) + " errors and tolerances");
  }
  for (std::size_t k = 0; k + 1 < p; ++k) {
    if (errors[k] > tolerances[k]) return k + 1;
  }
  return p;
}

double tolerance_from_tv(double epsilon, double sigma, std::size_t num_steps) {
  // Extended precision keeps the result correctly rounded for typical inputs.
  const long double e = epsilon;
  const long double s = sigma;
  const long double t = static_cast<long double>(num_steps);
  return static_cast<double>(4.0L * e * e * s * s / (t * t));
}

RunReport paradigms_sample(const StepRule& rule, const PicardConfig& config, std::span<const double> x0,
                           const NoiseArray& noises) {
  const std::size_t n = rule.num_steps();
  const std::size_t dim = x0.size();
  if (dim != rule.dim()) throw std::invalid_argument("initial state dimension does not match the oracle");
  if (!(config.tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  if (config.window_size == 0) throw std::invalid_argument("window size must be at least 1");
  if (config.workers == 0) throw std::invalid_argument("workers must be at least 1");
  if (config.max_iterations != 0 && config.max_iterations < n) {
    throw std::invalid_argument("max_iterations must be at least the number of steps");
  }
  const bool stochastic = config.mode == PicardMode::kStochastic;
  if (stochastic != rule.stochastic()) throw std::invalid_argument("Picard mode does not match the step rule");
  if (stochastic) {
    if (noises.size() != n || noises.dim() != dim) {
      throw std::invalid_argument("noise array must hold " + std::to_string(n) + " vectors of dimension " +
                                  std::to_string(dim));
    }
  } else if (!noises.all_zero()) {
    throw std::invalid_argument("deterministic mode requires all-zero noise");
  }
  const std::size_t limit = config.max_iterations == 0 ? n : config.max_iterations;
  const bool accept_all = std::isinf(config.tolerance);

  const auto start = std::chrono::steady_clock::now();
  TrajectoryWindow window(std::min(config.window_size, n), x0);
  WorkerPool pool(config.workers);
  std::vector<double> next;
  std::vector<double> errors, tolerances;
  std::vector<double> last_error(n + 1, 0.0);
  std::vector<std::size_t> last_seen(n + 1, 0);  // iteration number, 0 = never
  std::vector<double> ratios;

  RunReport report;
  report.num_steps = n;
  std::size_t iteration = 0;
  while (window.base() < n) {
    if (iteration == limit) throw IterationLimitExceeded(limit, report.stride_trace);
    ++iteration;
    const std::size_t base = window.base();
    const std::size_t p = window.size();

    pool.parallel_for(p, [&](std::size_t j) {
      auto x = window.state(j);
      auto y = window.drift(j);
      rule.advance(x, base + j, y);
      for (std::size_t d = 0; d < dim; ++d) y[d] -= x[d];
    });

    next.assign((p + 1) * dim, 0.0);
    auto next_row = [&](std::size_t o) { return std::span<double>(next.data() + o * dim, dim); };
    {
      auto edge = window.state(0);
      std::copy(edge.begin(), edge.end(), next.begin());
    }
    for (std::size_t j = 0; j < p; ++j) {
      auto prev = next_row(j);
      auto out = next_row(j + 1);
      auto y = window.drift(j);
      for (std::size_t d = 0; d < dim; ++d) {
        out[d] = prev[d] + y[d];
        if (stochastic) out[d] += noises.at(base + j)[d];
      }
      guard_state(out, iteration, base + j + 1);
    }

    errors.resize(p - 1);
    tolerances.resize(p - 1);
    for (std::size_t j = 1; j < p; ++j) {
      const double err = squared_distance(next_row(j), window.state(j)) / static_cast<double>(dim);
      errors[j - 1] = err;
      const double sigma = rule.tolerance_sigma(base + j);
      tolerances[j - 1] = accept_all ? config.tolerance : config.tolerance * sigma * sigma;
      const std::size_t abs = base + j;
      if (last_seen[abs] + 1 == iteration && last_error[abs] > 0.0) ratios.push_back(std::sqrt(err / last_error[abs]));
      last_seen[abs] = iteration;
      last_error[abs] = err;
    }
    const std::size_t stride = compute_stride(errors, tolerances, p);

    std::copy(next.begin(), next.end(), window.states().begin());
    window.slide(stride, n);
    report.stride_trace.push_back(stride);
    report.window_trace.push_back(p);
    report.model_evals += p * rule.evals_per_step();
  }

  auto edge = window.state(0);
  report.final_state.assign(edge.begin(), edge.end());
  report.parallel_iterations = iteration;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!ratios.empty()) {
    report.contraction.samples = ratios.size();
    report.contraction.max = *std::max_element(ratios.begin(), ratios.end());
    auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
    std::nth_element(ratios.begin(), mid, ratios.end());
    report.contraction.median = *mid;
  }
  return report;
}

RunReport paradigms_sample(const DriftOracle& oracle, const NoiseSchedule& schedule, const PicardConfig& config,
                           std::span<const double> x0, const NoiseArray& noises) {
  return paradigms_sample(DdpmRule(oracle, schedule), config, x0, noises);
}

}  // namespace paradigms
