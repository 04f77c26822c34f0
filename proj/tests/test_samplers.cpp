#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "paradigms/samplers.hpp"
#include "test_support.hpp"

using namespace paradigms;

namespace {

double flow_error(SamplerKind kind, std::size_t steps, std::uint64_t seed) {
  const auto s = default_linear_schedule(100);
  const auto m = standard_test_mixture();
  const MixtureOracle oracle(m, s);
  const auto x0 = draw_prior(seed, 2);
  const auto rule = make_step_rule(kind, oracle, s, steps);
  const auto traj = run_sequential(*rule, x0, NoiseArray{});
  const auto ref = support::fine_flow_reference(m, x0, s.alpha_bar(TimeIndex(0)));
  return support::norm_diff(traj.final_state(), ref);
}

}  // namespace

TEST(Noise, DrawIsKeyedByStep) {
  const auto s = default_linear_schedule(30);
  const auto a = NoiseArray::draw(4, s.sigmas(), 3);
  const auto b = NoiseArray::draw(4, s.sigmas().subspan(0, 10), 3);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a.at(i)[k], b.at(i)[k]);
  }
  EXPECT_FALSE(a.all_zero());
  EXPECT_TRUE(NoiseArray::zeros(5, 2).all_zero());
}

TEST(Sampler, ParseNames) {
  EXPECT_EQ(parse_sampler_kind("ddpm"), SamplerKind::kDdpm);
  EXPECT_EQ(parse_sampler_kind("ddim"), SamplerKind::kDdim);
  EXPECT_EQ(parse_sampler_kind("heun"), SamplerKind::kHeun);
  EXPECT_EQ(to_string(SamplerKind::kHeun), "heun");
  EXPECT_THROW(parse_sampler_kind("euler"), std::invalid_argument);
}

TEST(Sampler, UniformIndices) {
  const auto idx = uniform_step_indices(100, 15);
  ASSERT_EQ(idx.size(), 16u);
  EXPECT_EQ(idx.front(), TimeIndex(0));
  EXPECT_EQ(idx.back(), TimeIndex(100));
  EXPECT_EQ(idx[1], TimeIndex(7));
  for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LT(idx[i - 1], idx[i]);
  EXPECT_EQ(uniform_step_indices(10, 10).size(), 11u);
  EXPECT_THROW(uniform_step_indices(10, 11), std::invalid_argument);
  EXPECT_THROW(uniform_step_indices(10, 0), std::invalid_argument);
}

TEST(Ddpm, StandardNormalDataStaysStandardNormal) {
  const auto s = default_linear_schedule(100);
  const GaussianMixture m({{1.0, {0.0}, {1.0}}});
  const MixtureOracle oracle(m, s);
  double mean = 0.0, sq = 0.0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    const auto x0 = draw_prior(seed, 1);
    const auto noise = NoiseArray::draw(seed, s.sigmas(), 1);
    const double x = sample_ddpm(oracle, s, x0, noise).final_state()[0];
    mean += x;
    sq += x * x;
  }
  mean /= n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Ddpm, TrajectoryShapeAndEvalCount) {
  const auto s = default_linear_schedule(100);
  auto oracle = counting_oracle(standard_test_mixture(), s);
  const auto x0 = draw_prior(1, 2);
  const auto traj = sample_ddpm(oracle, s, x0, NoiseArray::draw(1, s.sigmas(), 2));
  EXPECT_EQ(traj.num_steps(), 100u);
  EXPECT_EQ(traj.states.front(), x0);
  EXPECT_EQ(oracle.evaluations(), 100u);
}

TEST(Ddpm, ZeroNoiseIsDeterministicMeanChain) {
  const auto s = default_linear_schedule(20);
  const MixtureOracle oracle(standard_test_mixture(), s);
  const auto x0 = draw_prior(3, 2);
  const auto traj = sample_ddpm(oracle, s, x0, NoiseArray::zeros(20, 2));
  Vector mu(2);
  oracle.denoise_mean(traj.states[4], TimeIndex(4), mu);
  EXPECT_EQ(traj.states[5], mu);
}

TEST(Ddpm, RejectsWrongNoiseLength) {
  const auto s = default_linear_schedule(20);
  const MixtureOracle oracle(standard_test_mixture(), s);
  EXPECT_THROW(sample_ddpm(oracle, s, draw_prior(0, 2), NoiseArray::zeros(19, 2)), std::invalid_argument);
}

TEST(Ddim, FifteenStepsNearFineReference) {
  EXPECT_LT(flow_error(SamplerKind::kDdim, 15, 0), 0.05);
}

TEST(Ddim, RefinementReducesError) {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    const double e15 = flow_error(SamplerKind::kDdim, 15, seed);
    const double e30 = flow_error(SamplerKind::kDdim, 30, seed);
    const double e60 = flow_error(SamplerKind::kDdim, 60, seed);
    EXPECT_LT(e30, e15) << seed;
    EXPECT_LT(e60, e30) << seed;
  }
}

TEST(Ddim, EvalCount) {
  const auto s = default_linear_schedule(100);
  auto oracle = counting_oracle(standard_test_mixture(), s);
  const auto idx = uniform_step_indices(100, 15);
  (void)sample_ddim(oracle, s, draw_prior(0, 2), idx);
  EXPECT_EQ(oracle.evaluations(), 15u);
}

TEST(Heun, MoreAccurateThanEuler) {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    EXPECT_LT(flow_error(SamplerKind::kHeun, 15, seed), flow_error(SamplerKind::kDdim, 15, seed)) << seed;
  }
}

TEST(Heun, EvalCount) {
  const auto s = default_linear_schedule(100);
  auto oracle = counting_oracle(standard_test_mixture(), s);
  const auto idx = uniform_step_indices(100, 15);
  (void)sample_heun(oracle, s, draw_prior(0, 2), idx);
  EXPECT_EQ(oracle.evaluations(), 30u);
}

TEST(FlowStep, ExactOnLinearEpsilon) {
  // eps = c makes dx/dsigma constant, so both integrators are exact.
  const EpsilonFn eps = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.5; };
  Vector out(1);
  euler_flow_step(eps, Vector{1.0}, 2.0, 1.0, out);
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  heun_flow_step(eps, Vector{1.0}, 2.0, 1.0, out);
  EXPECT_DOUBLE_EQ(out[0], 0.5);
}

TEST(FlowStep, HeunSecondOrderOnLinearSigma) {
  // eps = sigma integrates to sigma^2 / 2, which the trapezoid rule gets exactly.
  const EpsilonFn eps = [](std::span<const double>, double s, std::span<double> out) { out[0] = s; };
  Vector out(1);
  heun_flow_step(eps, Vector{0.0}, 2.0, 0.0, out);
  EXPECT_DOUBLE_EQ(out[0], -2.0);
}

TEST(FlowRule, RejectsBadIndices) {
  const auto s = default_linear_schedule(10);
  const MixtureOracle oracle(standard_test_mixture(), s);
  EXPECT_THROW(ProbabilityFlowRule(oracle, s, {TimeIndex(0), TimeIndex(5)}, SamplerKind::kDdim),
               std::invalid_argument);
  EXPECT_THROW(ProbabilityFlowRule(oracle, s, {TimeIndex(0), TimeIndex(5), TimeIndex(5), TimeIndex(10)},
                                   SamplerKind::kDdim),
               std::invalid_argument);
}
