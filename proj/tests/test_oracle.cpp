#include <gtest/gtest.h>

#include <cmath>

#include "zeloba/estimator.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/problems.hpp"

namespace zeloba {
namespace {

ProblemSpec ball() { return analytic_problem("linear-ball"); }
Vector point(double a, double b) { return (Vector(2) << a, b).finished(); }

TEST(Oracle, ZeroNoiseIsExact) {
  const auto p = ball();
  Oracle oracle(p, NoiseModel{NoiseKind::kGaussian, 0.0, 1});
  const Vector x = point(0.3, -0.2);
  EXPECT_EQ(oracle.measure(0, x, {1, 0, Side::kBase}), p.values(x)[0]);
  EXPECT_EQ(oracle.measure(1, x, {1, 0, Side::kBase}), p.values(x)[1]);
}

TEST(Oracle, SameKeySameValue) {
  Oracle oracle(ball(), NoiseModel{NoiseKind::kGaussian, 1.0, 9});
  const Vector x = point(0.1, 0.1);
  EXPECT_EQ(oracle.measure(1, x, {4, 2, Side::kPerturbed}), oracle.measure(1, x, {4, 2, Side::kPerturbed}));
  EXPECT_NE(oracle.measure(1, x, {4, 2, Side::kPerturbed}), oracle.measure(1, x, {4, 3, Side::kPerturbed}));
}

// Mean of 10⁴ measurements lies within 0.03 of the truth in ≥ 99% of trials.
TEST(Oracle, SampleMeanConcentrates) {
  const auto p = ball();
  const Vector x = point(0.2, 0.4);
  const double truth = p.values(x)[0];
  int hits = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Oracle oracle(p, NoiseModel{NoiseKind::kGaussian, 1.0, static_cast<std::uint64_t>(t)});
    double sum = 0.0;
    for (std::uint64_t j = 0; j < 10'000; ++j) sum += oracle.measure(0, x, {1, j, Side::kBase});
    if (std::abs(sum / 1e4 - truth) <= 0.03) ++hits;
  }
  EXPECT_GE(hits, 198);
}

TEST(Oracle, NoiseMoments) {
  for (NoiseKind kind : {NoiseKind::kGaussian, NoiseKind::kBoundedUniform}) {
    const NoiseModel noise{kind, 0.5, 21};
    const int n = 100'000;
    double sum = 0.0, sum_sq = 0.0;
    for (int j = 0; j < n; ++j) {
      const double xi = noise.draw(1, static_cast<std::uint64_t>(j), 0, Side::kBase);
      if (kind == NoiseKind::kBoundedUniform) {
        ASSERT_LE(std::abs(xi), 0.5 * std::sqrt(3.0));
      }
      sum += xi;
      sum_sq += xi * xi;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 4.0 * 0.5 / std::sqrt(n)) << to_string(kind);
    EXPECT_NEAR(sum_sq / n - mean * mean, 0.25, 0.05 * 0.25) << to_string(kind);
  }
  EXPECT_EQ((NoiseModel{NoiseKind::kNone, 1.0, 0}.draw(1, 1, 1, Side::kBase)), 0.0);
}

TEST(Oracle, BatchCountsEveryScalar) {
  const auto p = ball();
  Oracle oracle(p, NoiseModel{NoiseKind::kGaussian, 0.1, 3});
  const auto batch = oracle.measure_batch(point(0.0, 0.0), sphere_sample(2, 1, 3, 1), 0.1, 1);
  EXPECT_EQ(batch.base_values.size() + batch.perturbed_values.size(), 4);
  EXPECT_EQ(oracle.scalar_calls(), 4u);
  EXPECT_EQ(oracle.total_directions(), 1u);
}

TEST(Oracle, DirectionBudgetOverManyIterations) {
  Oracle oracle(ball(), NoiseModel{NoiseKind::kGaussian, 0.0, 3});
  for (std::uint64_t k = 1; k <= 500; ++k) oracle.measure_batch(point(0.0, 0.0), sphere_sample(2, 7, 3, k), 0.01, k);
  EXPECT_EQ(oracle.total_directions(), 3500u);
  EXPECT_EQ(oracle.audit().entries.size(), 500u * 8u);
}

TEST(Oracle, ZeroRadiusKeepsNoiseIndependent) {
  Oracle oracle(ball(), NoiseModel{NoiseKind::kGaussian, 1.0, 5});
  const auto batch = oracle.measure_batch(point(0.0, 0.0), sphere_sample(2, 3, 5, 1), 0.0, 1);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NE(batch.base_values(j, 0), batch.perturbed_values(j, 0));
}

TEST(Oracle, RejectsNonUnitDirection) {
  Oracle oracle(ball(), NoiseModel{});
  std::vector<Vector> dirs{point(1.0, 1.0)};
  EXPECT_THROW(oracle.measure_batch(point(0.0, 0.0), dirs, 0.1, 1), ContractViolation);
}

TEST(Oracle, BudgetCap) {
  Oracle oracle(ball(), NoiseModel{}, 5);
  oracle.measure_batch(point(0.0, 0.0), sphere_sample(2, 1, 0, 1), 0.1, 1);
  EXPECT_THROW(oracle.measure_batch(point(0.0, 0.0), sphere_sample(2, 1, 0, 2), 0.1, 2), BudgetExhausted);
}

TEST(Oracle, AuditRecordsViolations) {
  Oracle oracle(ball(), NoiseModel{});
  EXPECT_TRUE(oracle.audit().entries.empty());
  EXPECT_EQ(oracle.audit().violation_count, 0u);
  oracle.measure(0, point(2.0, 0.0), {1, 0, Side::kBase});
  oracle.measure(1, point(2.0, 0.0), {1, 0, Side::kBase});  // same slot, audited once
  const auto audit = oracle.audit();
  ASSERT_EQ(audit.entries.size(), 1u);
  EXPECT_EQ(audit.violation_count, 1u);
  EXPECT_DOUBLE_EQ(audit.entries[0].true_fc, 3.0);
  EXPECT_EQ(audit.total_scalar_calls, 2u);
}

}  // namespace
}  // namespace zeloba
