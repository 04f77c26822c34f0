#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "paradigms/oracle.hpp"
#include "paradigms/picard.hpp"
#include "paradigms/samplers.hpp"

namespace paradigms {

struct EfficiencyReport {
  std::uint64_t sequential_evals = 0;
  std::uint64_t parallel_evals = 0;
  /// parallel_evals / sequential_evals.
  double algorithm_inefficiency = 0.0;
  std::size_t parallel_iterations = 0;
  /// parallel_iterations / num_steps.
  double iteration_ratio = 0.0;
  double wall_time_sequential = 0.0;
  double wall_time_parallel = 0.0;
  /// wall_time_sequential / wall_time_parallel; 1 when the two are equal.
  double speedup = 1.0;
};

/// Sequential runs expressed as a RunReport: one iteration per step.
RunReport sequential_report(const StepRule& rule, const Trajectory& trajectory, double wall_time);

EfficiencyReport efficiency(const RunReport& sequential, const RunReport& parallel);

/// Euclidean distance between two states.
double parity_error(std::span<const double> a, std::span<const double> b);
/// Largest per-timestep Euclidean distance between two trajectories.
double parity_error(const Trajectory& a, const Trajectory& b);

struct QualityReport {
  std::size_t num_samples = 0;
  /// |empirical mean - mixture mean| per dimension.
  Vector mean_error;
  /// Max-abs entry difference of empirical and mixture covariance.
  double covariance_error = 0.0;
  /// Max |assigned fraction - weight| over components.
  double component_weight_error = 0.0;
  std::vector<double> component_weights;
  /// Empirical mean of the samples assigned to each component (empty if none assigned).
  std::vector<Vector> component_means;
  /// Energy distance to an equal-size fresh draw from the mixture.
  double energy_distance = 0.0;
};

inline constexpr std::size_t kMinQualitySamples = 1000;

/// Sample-quality summary against an analytic mixture. `reference_seed` keys
/// the fresh analytic draw used for the energy distance.
QualityReport sample_quality(std::span<const Vector> samples, const GaussianMixture& mixture,
                             std::uint64_t reference_seed = 0x5eed);

struct ComponentAssignment {
  std::vector<double> weights;
  std::vector<Vector> means;
};

/// Assigns each sample to its most responsible data component.
ComponentAssignment assign_components(std::span<const Vector> samples, const GaussianMixture& mixture);

/// V-statistic energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'|.
double energy_distance(std::span<const Vector> a, std::span<const Vector> b);

struct PermutationTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t points_per_sample = 0;
};

/// Two-sample energy permutation test. Each sample is truncated to its first
/// `max_points` entries to bound the pooled distance matrix.
PermutationTestResult energy_permutation_test(std::span<const Vector> a, std::span<const Vector> b,
                                              std::size_t permutations, std::uint64_t seed,
                                              std::size_t max_points = 1000);

}  // namespace paradigms
