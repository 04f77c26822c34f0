#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "paradigms/oracle.hpp"
#include "paradigms/samplers.hpp"
#include "paradigms/schedule.hpp"

namespace paradigms {

/// A state left the finite range (or exceeded the divergence guard).
class NumericalDivergence : public std::runtime_error {
 public:
  NumericalDivergence(std::size_t iteration, std::size_t index, const std::string& detail);

  std::size_t iteration() const { return iteration_; }
  std::size_t index() const { return index_; }

 private:
  std::size_t iteration_;
  std::size_t index_;
};

/// The sliding window did not reach the end of the horizon within max_iterations.
class IterationLimitExceeded : public std::runtime_error {
 public:
  IterationLimitExceeded(std::size_t limit, std::vector<std::size_t> stride_trace);

  std::size_t limit() const { return limit_; }
  const std::vector<std::size_t>& stride_trace() const { return stride_trace_; }

 private:
  std::size_t limit_;
  std::vector<std::size_t> stride_trace_;
};

/// Drift s(x, u) of dx/du = s on u in [0, 1].
using OdeDrift = std::function<void(std::span<const double> x, double time, std::span<double> out)>;

struct PicardFullOptions {
  /// Stop once max_i ||x^{k+1}_i - x^k_i|| <= stop_tol.
  double stop_tol = 1e-10;
  /// 0 means T (exact convergence is guaranteed by then).
  std::size_t max_iterations = 0;
  std::size_t workers = 1;
};

struct PicardFullResult {
  Trajectory trajectory;
  /// Number of full-horizon sweeps performed.
  std::size_t iterations = 0;
};

/// Discretized Picard iteration over the whole horizon with step 1/T:
/// x^{k+1}_t = x^k_0 + (1/T) sum_{i<t} s(x^k_i, i/T), starting from x^0_i = x0.
PicardFullResult picard_full(const OdeDrift& drift, std::span<const double> x0, std::size_t num_steps,
                             const PicardFullOptions& options = {});

enum class PicardMode { kStochastic, kDeterministic };

struct PicardConfig {
  /// Relative to sigma^2; +inf accepts every window immediately.
  double tolerance = 0.1;
  std::size_t window_size = 20;
  std::size_t workers = 1;
  /// 0 means the number of steps.
  std::size_t max_iterations = 0;
  PicardMode mode = PicardMode::kStochastic;
};

/// Summary of sqrt(err_k / err_{k-1}) at timesteps revisited by consecutive sweeps.
struct ContractionSummary {
  std::size_t samples = 0;
  double median = 0.0;
  double max = 0.0;
};

struct RunReport {
  Vector final_state;
  std::uint64_t model_evals = 0;
  std::size_t parallel_iterations = 0;
  std::vector<std::size_t> stride_trace;
  /// Window size used at each iteration.
  std::vector<std::size_t> window_trace;
  std::size_t num_steps = 0;
  double wall_time = 0.0;  // seconds
  ContractionSummary contraction;
};

/// Picard window over [base, base + size]: size + 1 states (the converged left
/// edge plus size points), drifts at offsets [0, size).
class TrajectoryWindow {
 public:
  TrajectoryWindow(std::size_t size, std::span<const double> x0);

  std::size_t base() const { return base_; }
  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> state(std::size_t offset) const { return {states_.data() + offset * dim_, dim_}; }
  std::span<double> state(std::size_t offset) { return {states_.data() + offset * dim_, dim_}; }
  std::span<double> states() { return states_; }
  std::span<double> drift(std::size_t offset) { return {drifts_.data() + offset * dim_, dim_}; }

  /// Moves the left edge forward by `stride`, shrinks to min(size, horizon - base)
  /// and seeds newly covered points with the right-edge state.
  void slide(std::size_t stride, std::size_t horizon);

 private:
  std::size_t base_ = 0;
  std::size_t size_;
  std::size_t dim_;
  std::vector<double> states_;
  std::vector<double> drifts_;
};

/// min({j in [1, p) : errors_j > tolerances_j} U {p}). errors[k] holds offset k + 1.
std::size_t compute_stride(std::span<const double> errors, std::span<const double> tolerances, std::size_t p);

/// Squared-norm tolerance 4 eps^2 sigma^2 / T^2 giving total variation <= eps.
double tolerance_from_tv(double epsilon, double sigma, std::size_t num_steps);

/// Sliding-window Picard sampling of an arbitrary step rule.
RunReport paradigms_sample(const StepRule& rule, const PicardConfig& config, std::span<const double> x0,
                           const NoiseArray& noises);

/// ParaDDPM.
RunReport paradigms_sample(const DriftOracle& oracle, const NoiseSchedule& schedule, const PicardConfig& config,
                           std::span<const double> x0, const NoiseArray& noises);

/// Divergence guard: states with norm above this multiple of sqrt(D) abort a run.
inline constexpr double kDivergenceBound = 1e6;

}  // namespace paradigms
