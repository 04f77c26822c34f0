#include "paradigms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "paradigms/random.hpp"

namespace paradigms {
namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

void check_samples(std::span<const Vector> samples, std::size_t dim) {
  for (const auto& s : samples) {
    if (s.size() != dim) throw std::invalid_argument("sample dimension mismatch");
  }
}

}  // namespace

RunReport sequential_report(const StepRule& rule, const Trajectory& trajectory, double wall_time) {
  RunReport r;
  r.final_state = trajectory.final_state();
  r.num_steps = rule.num_steps();
  r.model_evals = rule.num_steps() * rule.evals_per_step();
  r.parallel_iterations = rule.num_steps();
  r.stride_trace.assign(rule.num_steps(), 1);
  r.window_trace.assign(rule.num_steps(), 1);
  r.wall_time = wall_time;
  return r;
}

EfficiencyReport efficiency(const RunReport& sequential, const RunReport& parallel) {
  if (sequential.num_steps != parallel.num_steps) {
    throw std::invalid_argument("efficiency: reports cover different step counts (" +
                                std::to_string(sequential.num_steps) + " vs " + std::to_string(parallel.num_steps) + ")");
  }
  if (sequential.num_steps == 0 || sequential.model_evals == 0) {
    throw std::invalid_argument("efficiency: empty sequential report");
  }
  EfficiencyReport e;
  e.sequential_evals = sequential.model_evals;
  e.parallel_evals = parallel.model_evals;
  e.algorithm_inefficiency = static_cast<double>(parallel.model_evals) / static_cast<double>(sequential.model_evals);
  e.parallel_iterations = parallel.parallel_iterations;
  e.iteration_ratio = static_cast<double>(parallel.parallel_iterations) / static_cast<double>(parallel.num_steps);
  e.wall_time_sequential = sequential.wall_time;
  e.wall_time_parallel = parallel.wall_time;
  e.speedup = sequential.wall_time == parallel.wall_time ? 1.0 : sequential.wall_time / parallel.wall_time;
  return e;
}

double parity_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("parity_error: dimension mismatch");
  return distance(a, b);
}

double parity_error(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) throw std::invalid_argument("parity_error: trajectory length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) worst = std::max(worst, parity_error(a.states[i], b.states[i]));
  return worst;
}

ComponentAssignment assign_components(std::span<const Vector> samples, const GaussianMixture& mixture) {
  const std::size_t k = mixture.size();
  const std::size_t dim = mixture.dim();
  check_samples(samples, dim);
  std::vector<std::size_t> counts(k, 0);
  std::vector<Vector> sums(k, Vector(dim, 0.0));
  std::vector<double> resp(k);
  for (const auto& s : samples) {
    mixture.responsibilities(s, 1.0, resp);
    const auto best = static_cast<std::size_t>(std::max_element(resp.begin(), resp.end()) - resp.begin());
    ++counts[best];
    for (std::size_t d = 0; d < dim; ++d) sums[best][d] += s[d];
  }
  ComponentAssignment out;
  for (std::size_t i = 0; i < k; ++i) {
    out.weights.push_back(samples.empty() ? 0.0 : static_cast<double>(counts[i]) / static_cast<double>(samples.size()));
    Vector m;
    if (counts[i] > 0) {
      m = sums[i];
      for (double& v : m) v /= static_cast<double>(counts[i]);
    }
    out.means.push_back(std::move(m));
  }
  return out;
}

double energy_distance(std::span<const Vector> a, std::span<const Vector> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_distance: empty sample");
  auto mean_dist = [](std::span<const Vector> x, std::span<const Vector> y) {
    double s = 0.0;
    for (const auto& u : x) {
      for (const auto& v : y) s += distance(u, v);
    }
    return s / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  };
  return 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
}

PermutationTestResult energy_permutation_test(std::span<const Vector> a, std::span<const Vector> b,
                                              std::size_t permutations, std::uint64_t seed,
                                              std::size_t max_points) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy test: empty sample");
  const std::size_t na = std::min(a.size(), max_points);
  const std::size_t nb = std::min(b.size(), max_points);
  const std::size_t n = na + nb;
  std::vector<const Vector*> pooled;
  pooled.reserve(n);
  for (std::size_t i = 0; i < na; ++i) pooled.push_back(&a[i]);
  for (std::size_t i = 0; i < nb; ++i) pooled.push_back(&b[i]);

  // Upper-triangular pooled distances, row i holding j > i.
  std::vector<double> dist(n * (n - 1) / 2);
  std::vector<std::size_t> row_start(n);
  for (std::size_t i = 0, pos = 0; i < n; ++i) {
    row_start[i] = pos;
    for (std::size_t j = i + 1; j < n; ++j) dist[pos++] = distance(*pooled[i], *pooled[j]);
  }

  // Scaled V-statistic n_a n_b / n * energy for a 0/1 labelling (1 = first sample).
  auto statistic = [&](const std::vector<unsigned char>& label) {
    double within_a = 0.0, within_b = 0.0, across = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* r = dist.data() + row_start[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = r[j - i - 1];
        if (label[i] != label[j]) {
          across += d;
        } else if (label[i]) {
          within_a += d;
        } else {
          within_b += d;
        }
      }
    }
    const double fa = static_cast<double>(na), fb = static_cast<double>(nb);
    const double e = 2.0 * across / (fa * fb) - 2.0 * within_a / (fa * fa) - 2.0 * within_b / (fb * fb);
    return fa * fb / (fa + fb) * e;
  };

  std::vector<unsigned char> label(n, 0);
  std::fill(label.begin(), label.begin() + static_cast<std::ptrdiff_t>(na), 1);
  PermutationTestResult result;
  result.points_per_sample = std::min(na, nb);
  result.statistic = statistic(label);

  std::size_t at_least = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    // Fisher-Yates driven by the counter-based generator.
    for (std::size_t i = n - 1; i > 0; --i) {
      const double u = uniform_at(seed, Stream::kPermutation, p, i);
      const auto j = static_cast<std::size_t>(u * static_cast<double>(i + 1));
      std::swap(label[i], label[std::min(j, i)]);
    }
    if (statistic(label) >= result.statistic) ++at_least;
  }
  result.p_value = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  return result;
}

QualityReport sample_quality(std::span<const Vector> samples, const GaussianMixture& mixture,
                             std::uint64_t reference_seed) {
  if (samples.size() < kMinQualitySamples) {
    throw std::invalid_argument("sample_quality needs at least " + std::to_string(kMinQualitySamples) + " samples");
  }
  const std::size_t dim = mixture.dim();
  check_samples(samples, dim);
  const double count = static_cast<double>(samples.size());

  QualityReport q;
  q.num_samples = samples.size();
  Vector mean(dim, 0.0);
  for (const auto& s : samples) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += s[d];
  }
  for (double& m : mean) m /= count;
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& s : samples) {
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) cov[a * dim + b] += (s[a] - mean[a]) * (s[b] - mean[b]);
    }
  }
  for (double& c : cov) c /= count;

  const Vector true_mean = mixture.mean();
  const auto true_cov = mixture.covariance();
  for (std::size_t d = 0; d < dim; ++d) q.mean_error.push_back(std::abs(mean[d] - true_mean[d]));
  for (std::size_t i = 0; i < cov.size(); ++i) q.covariance_error = std::max(q.covariance_error, std::abs(cov[i] - true_cov[i]));

  auto assignment = assign_components(samples, mixture);
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    q.component_weight_error =
        std::max(q.component_weight_error, std::abs(assignment.weights[i] - mixture.component(i).weight));
  }
  q.component_weights = std::move(assignment.weights);
  q.component_means = std::move(assignment.means);

  const auto reference = mixture.sample_many(reference_seed, samples.size());
  q.energy_distance = std::max(0.0, energy_distance(samples, reference));
  return q;
}

}  // namespace paradigms
