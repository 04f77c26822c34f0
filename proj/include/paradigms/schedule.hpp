#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace paradigms {

/// Reverse-time position on a T-step chain: 0 is the Gaussian prior, T is data.
struct TimeIndex {
  std::size_t value = 0;

  constexpr TimeIndex() = default;
  constexpr explicit TimeIndex(std::size_t v) : value(v) {}

  friend constexpr bool operator==(TimeIndex, TimeIndex) = default;
  friend constexpr auto operator<=>(TimeIndex, TimeIndex) = default;
};

/// How the posterior standard deviation of the step that produces data is set.
enum class SigmaConvention {
  /// alpha_bar_prev is taken from the adjacent noised level, giving sigma^2 = beta_1.
  kAdjacentLevel,
  /// alpha_bar_prev = 1, giving sigma = 0 on the last step.
  kZeroFinal,
};

struct MarginalParams {
  double scale = 1.0;     // sqrt(alpha_bar)
  double variance = 0.0;  // 1 - alpha_bar
};

/// Discrete variance-preserving diffusion coefficients for a T-step chain.
///
/// Storage is forward-time (betas[f-1] = beta_f, alpha_bars[f] = prod_{i<=f}(1 - beta_i)
/// with alpha_bars[0] = 1); the public accessors taking a TimeIndex map through
/// f = T - t. Immutable after construction.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas,
                         SigmaConvention convention = SigmaConvention::kAdjacentLevel);

  std::size_t num_steps() const { return betas_.size(); }
  SigmaConvention sigma_convention() const { return convention_; }

  std::span<const double> betas() const { return betas_; }
  /// alpha_bar indexed by forward time 0..T.
  std::span<const double> alpha_bars() const { return alpha_bars_; }
  /// sigma of the denoising step leaving reverse index t, for t in [0, T).
  std::span<const double> sigmas() const { return sigmas_; }

  /// alpha_bar of the marginal at reverse index t in [0, T]; equals 1 at t = T.
  double alpha_bar(TimeIndex t) const;
  /// Forward increment undone by the denoising step leaving t, t in [0, T).
  double step_beta(TimeIndex t) const;
  /// DDPM posterior standard deviation of the denoising step leaving t.
  double sigma(TimeIndex t) const;

  /// Discrete-time coefficients of dx = f x dt + g dw, per unit step: f = -beta/2, g = sqrt(beta).
  double drift_coefficient(TimeIndex t) const;
  double diffusion_coefficient(TimeIndex t) const;

 private:
  std::size_t forward_index(TimeIndex t) const;

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
  std::vector<double> sigmas_;
  SigmaConvention convention_;
};

/// Betas linearly spaced from beta_min to beta_max over T forward steps.
NoiseSchedule build_linear_schedule(std::size_t num_steps, double beta_min, double beta_max,
                                    SigmaConvention convention = SigmaConvention::kAdjacentLevel);

inline constexpr double kDefaultBetaMin = 1e-4;
inline constexpr double kDefaultBetaMax = 0.02;

/// Linear betas from kDefaultBetaMin to kDefaultBetaMax over T steps. Short
/// chains do not reach N(0, I): alpha_bar_T is about 0.36 at T = 100.
NoiseSchedule default_linear_schedule(std::size_t num_steps,
                                      SigmaConvention convention = SigmaConvention::kAdjacentLevel);

double ddpm_sigma(const NoiseSchedule& schedule, TimeIndex t);
MarginalParams marginal_params(const NoiseSchedule& schedule, TimeIndex t);

}  // namespace paradigms
