#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "zeloba/problems.hpp"
#include "zeloba/smoothing.hpp"
#include "zeloba/solver.hpp"

namespace zeloba {
namespace {

AlgoConfig linear_ball_config(std::uint64_t seed) {
  AlgoConfig cfg;
  cfg.eta = 0.05;
  cfg.max_iters = 2000;
  cfg.samples = 16;
  cfg.radius_policy = RadiusPolicy::kAdaptive;
  cfg.seed = seed;
  return cfg;
}

TEST(Parameters, SigmaBig) {
  EXPECT_DOUBLE_EQ(sigma_big(1, std::exp(-1.0), 0, 0.0, 1.0, 1.0), 2.0);
  const double s = sigma_big(3, 0.1, 10, 0.0, 2.0, 0.5);
  EXPECT_NEAR(s, 4.0 * std::sqrt(std::log(10.0) + std::log(21.0)) * 1.0, 1e-12);
}

TEST(Parameters, RequiredSamplesEqualityPoint) {
  const double nu = 0.2, c = 0.5, lip = 3.0;
  const double sig = nu * lip * c / (2.0 * (c + 1.0));
  EXPECT_NEAR(sample_bound(sig, nu, c, lip), 1.0, 1e-12);
  EXPECT_EQ(required_samples(sig * 0.5, nu, c, lip), 1u);
  EXPECT_EQ(required_samples(sig * 2.0, nu, c, lip), 4u);
}

TEST(Parameters, MarginConstantAndRadius) {
  const auto p = analytic_problem("smooth-2con");
  AlgoConfig cfg;
  cfg.eta = 0.3;
  EXPECT_DOUBLE_EQ(margin_constant(p, cfg), 1.5 * 1.5 / (8.0 * 9.0));
  EXPECT_DOUBLE_EQ(fixed_radius(p, cfg), margin_constant(p, cfg) * 0.3 / 3.0);
  cfg.c_override = 0.5;
  EXPECT_DOUBLE_EQ(margin_constant(p, cfg), 0.5);
}

TEST(StepSize, Examples) {
  EXPECT_DOUBLE_EQ(step_size(1, 1.0, 2.0, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(step_size(32, 1.0, 1.0, 1.0), 0.125);
  EXPECT_THROW(step_size(1, 1.0, 0.0, 1.0), DegenerateGradient);
  EXPECT_THROW(step_weight(0, 1.0, 1.0), ContractViolation);
  for (std::uint64_t k = 1; k < 200; k += 7) EXPECT_LE(step_weight(k, 0.3, 2.0), 0.3 / 4.0);
}

TEST(SelectOutput, SingleAndZeroWeights) {
  const std::vector<double> one{0.0, 0.0, 2.5, 0.0};
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(select_output(one, s), 2u);
  const std::vector<double> none{0.0, 0.0};
  EXPECT_THROW(select_output(none, 1), NoValidOutput);
}

TEST(SelectOutput, FrequenciesMatchWeights) {
  const std::vector<double> w{1.0, 3.0};
  const int draws = 100'000;
  int second = 0;
  for (int s = 0; s < draws; ++s) second += select_output(w, 77, static_cast<std::uint64_t>(s)) == 1;
  EXPECT_NEAR(second / double(draws), 0.75, 3.0 * std::sqrt(0.75 * 0.25 / draws));
}

TEST(SelectOutput, EqualWeightsAreUniform) {
  const std::vector<double> w(4, 1.0);
  std::vector<int> counts(4, 0);
  const int draws = 40'000;
  for (int s = 0; s < draws; ++s) ++counts[select_output(w, 5, static_cast<std::uint64_t>(s))];
  for (int c : counts) EXPECT_NEAR(c / double(draws), 0.25, 3.0 * std::sqrt(0.25 * 0.75 / draws));
}

TEST(KktMultipliers, Examples) {
  const std::vector<double> unique{-1.0, -2.0};
  const auto lam = kkt_multipliers(unique, -0.9, 0.1);
  EXPECT_DOUBLE_EQ(lam[0], 0.1 / 0.9);
  EXPECT_DOUBLE_EQ(lam[1], 0.0);
  const std::vector<double> single{-0.5};
  EXPECT_DOUBLE_EQ(kkt_multipliers(single, -0.4, 0.2)[0], 0.5);
  const std::vector<double> tie{-1.0, -1.0, -3.0};
  const auto split = kkt_multipliers(tie, -0.8, 0.1);
  EXPECT_DOUBLE_EQ(split[0], 0.1 / 1.6);
  EXPECT_DOUBLE_EQ(split[1], 0.1 / 1.6);
  EXPECT_DOUBLE_EQ(split[2], 0.0);
  EXPECT_THROW(kkt_multipliers(single, 0.0, 0.1), MarginExhausted);
}

TEST(KktResiduals, ExactOptimumIsStationary) {
  const auto p = analytic_problem("linear-ball");
  KktCertificate cert;
  cert.x_R = p.solution->x;
  cert.lambda_hat = p.solution->lambda;
  const auto r = kkt_residuals(p, cert, 0.01, 1000, 1);
  EXPECT_NEAR(r.stationarity, 0.0, 1e-14);
  EXPECT_NEAR(r.feasibility, 0.0, 1e-15);

  cert.x_R = Vector::Zero(2);
  cert.lambda_hat = {0.0};
  EXPECT_EQ(kkt_residuals(p, cert, 0.01, 1000, 1).complementarity, 0.0);
}

TEST(KktResiduals, ReferenceGradientsWithoutJacobian) {
  auto p = analytic_problem("linear-ball");
  KktCertificate cert;
  cert.x_R = p.solution->x;
  cert.lambda_hat = p.solution->lambda;
  p.jacobian = nullptr;
  // Linear objective and quadratic constraint: smoothing leaves both gradients unchanged.
  EXPECT_LT(kkt_residuals(p, cert, 0.05, 200'000, 2).stationarity, 0.05);
}

TEST(Run, ZeroIterations) {
  const auto p = analytic_problem("linear-ball");
  AlgoConfig cfg;
  cfg.max_iters = 0;
  const auto res = run(p, cfg, NoiseModel{});
  EXPECT_TRUE(res.trace.empty());
  EXPECT_EQ(res.x_final, p.safe_start);
  EXPECT_FALSE(res.certificate);
  EXPECT_EQ(res.status, RunStatus::kCompleted);
}

TEST(Run, TraceIsConsistentAndContained) {
  const auto p = analytic_problem("smooth-2con", 0.01);
  AlgoConfig cfg;
  cfg.eta = 0.1;
  cfg.max_iters = 200;
  cfg.samples = 20;
  cfg.radius_policy = RadiusPolicy::kAdaptive;
  cfg.seed = 4;
  const auto res = run(p, cfg, NoiseModel{NoiseKind::kGaussian, 0.01, 4});
  ASSERT_EQ(res.trace.size(), 200u);
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const auto& rec = res.trace[i];
    ASSERT_GT(rec.g_norm, 0.0);
    EXPECT_EQ(rec.gamma, step_size(rec.k, rec.alpha_hat, rec.g_norm, p.lipschitz));
    const Vector next = i + 1 < res.trace.size() ? res.trace[i + 1].x : res.x_final;
    const double bound = rec.alpha_hat / (2.0 * p.lipschitz * std::pow(double(rec.k), 0.4));
    const double rounding = std::numeric_limits<double>::epsilon() * next.norm();
    EXPECT_LE((next - rec.x).norm(), bound * (1.0 + 1e-12) + rounding);
  }
  EXPECT_EQ(res.audit.violation_count, 0u);
  EXPECT_EQ(res.audit.total_directions, 200u * 20u);
}

TEST(Run, DeterministicGivenSeed) {
  const auto p = analytic_problem("linear-ball", 0.01);
  auto cfg = linear_ball_config(11);
  cfg.max_iters = 100;
  const NoiseModel noise{NoiseKind::kGaussian, 0.01, 11};
  const auto a = run(p, cfg, noise);
  const auto b = run(p, cfg, noise);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].x, b.trace[i].x);
    EXPECT_EQ(a.trace[i].gamma, b.trace[i].gamma);
  }
  EXPECT_EQ(a.x_final, b.x_final);
  EXPECT_EQ(a.certificate->R, b.certificate->R);
}

TEST(Run, LinearBallReachesOptimum) {
  const auto p = analytic_problem("linear-ball", 0.01);
  std::vector<double> finals;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto res = run(p, linear_ball_config(seed), NoiseModel{NoiseKind::kGaussian, 0.01, seed});
    EXPECT_EQ(res.status, RunStatus::kCompleted);
    EXPECT_EQ(res.audit.violation_count, 0u);
    finals.push_back(p.objective(res.x_final));
  }
  std::nth_element(finals.begin(), finals.begin() + 5, finals.end());
  EXPECT_LE(std::abs(finals[5] - p.solution->objective), 5.0 * 0.05);
}

TEST(Run, BarrierDescendsOnNoiselessProblem) {
  const auto p = analytic_problem("smooth-2con");
  AlgoConfig cfg;
  cfg.eta = 0.3;
  cfg.max_iters = 40;
  cfg.sample_policy = SamplePolicy::kTheoretical;
  cfg.sample_cap = 400'000;
  cfg.seed = 3;
  const auto res = run(p, cfg, NoiseModel{});
  ASSERT_EQ(res.status, RunStatus::kCompleted);
  const double nu = fixed_radius(p, cfg);
  const auto b0 = barrier_value_and_grad(p, p.safe_start, cfg.eta, nu, 20'000, 1);
  const auto bk = barrier_value_and_grad(p, res.x_final, cfg.eta, nu, 20'000, 1);
  EXPECT_LT(bk.value, b0.value);
}

// A start inside the feasible set but with almost no margin.
ProblemSpec tight_start() {
  auto p = analytic_problem("linear-ball");
  p.safe_start = (Vector(2) << -0.999, 0.0).finished();
  return p;
}

TEST(Run, HaltOnExhaustedMargin) {
  const auto p = tight_start();
  AlgoConfig cfg;
  cfg.eta = 0.05;
  cfg.max_iters = 10;
  const auto res = run(p, cfg, NoiseModel{});
  EXPECT_EQ(res.status, RunStatus::kHalted);
  EXPECT_TRUE(res.trace.empty());
  EXPECT_FALSE(res.halt_reason.empty());
  EXPECT_EQ(res.x_final, p.safe_start);
}

TEST(Run, FreezeOnExhaustedMargin) {
  const auto p = tight_start();
  AlgoConfig cfg;
  cfg.eta = 0.05;
  cfg.max_iters = 5;
  cfg.margin_policy = MarginPolicy::kFreeze;
  const auto res = run(p, cfg, NoiseModel{});
  EXPECT_EQ(res.status, RunStatus::kCompleted);
  ASSERT_EQ(res.trace.size(), 5u);
  for (const auto& rec : res.trace) {
    EXPECT_TRUE(rec.frozen);
    EXPECT_EQ(rec.weight, 0.0);
    EXPECT_EQ(rec.x, p.safe_start);
  }
  EXPECT_FALSE(res.certificate);
  EXPECT_EQ(res.audit.total_directions, 0u);
}

TEST(Run, InfeasibleStartIsRejected) {
  auto p = tight_start();
  AlgoConfig cfg;
  cfg.max_iters = 3;
  // A huge declared noise level inflates the upper bound above zero.
  p.noise_sigma = 10.0;
  EXPECT_THROW(run(p, cfg, NoiseModel{}), InfeasibleStart);
}

TEST(Run, TheoreticalSampleCap) {
  const auto p = analytic_problem("smooth-2con", 0.01);
  AlgoConfig cfg;
  cfg.eta = 0.3;
  cfg.max_iters = 2;
  cfg.sample_policy = SamplePolicy::kTheoretical;
  cfg.sample_cap = 100;
  EXPECT_THROW(run(p, cfg, NoiseModel{}), ConfigError);
  cfg.clamp_to_cap = true;
  const auto res = run(p, cfg, NoiseModel{});
  EXPECT_EQ(res.samples_per_iteration, 100u);
  ASSERT_EQ(res.warnings.size(), 1u);
}

TEST(Plan, TermsMatchFormulas) {
  const auto p = analytic_problem("smooth-2con");
  AlgoConfig cfg;
  cfg.eta = 0.3;
  const auto pl = plan(p, cfg, 2.0);
  const double c = pl.c;
  EXPECT_DOUBLE_EQ(pl.k_descent, std::pow(3.0 * 2.0 / (c * 0.09), 2.5));
  EXPECT_DOUBLE_EQ(pl.k_log, std::pow(5.0 * std::log(1.0 / 0.3) / (c * 0.3), 5.0));
  EXPECT_EQ(pl.k_required(), std::max({pl.k_descent, pl.k_smoothness, pl.k_log}));
}

}  // namespace
}  // namespace zeloba
