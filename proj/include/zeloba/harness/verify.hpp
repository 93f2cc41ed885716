#pragma once

// Statistical property suites. Every check reports the measured statistic against its
// threshold; tolerances are expressed in measured standard errors or binomial sigmas.

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <limits>
#include <functional>
#include <string>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/estimator.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/problems.hpp"
#include "zeloba/random.hpp"
#include "zeloba/smoothing.hpp"
#include "zeloba/solver.hpp"

namespace zeloba::harness {

struct PropertyResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string relation;  // how statistic compares to threshold when passing, e.g. "<="
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<PropertyResult> results;

  bool passed() const {
    for (const auto& r : results)
      if (!r.passed) return false;
    return true;
  }
};

struct VerifyOptions {
  std::uint64_t seed = 2024;
  std::size_t mc_samples = 10'000;  // per smoothing reference evaluation
  std::size_t points = 100;         // random points / pairs per smoothing property
};

inline PropertyResult at_most(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, "<=", statistic <= threshold};
}

inline PropertyResult at_least(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, ">=", statistic >= threshold};
}

/// Upper-tail p-value of Pearson's chi-square statistic.
inline double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& probs) {
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = total * probs[i];
    stat += (observed[i] - expected) * (observed[i] - expected) / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Scalar benchmark function with its declared Lipschitz constant on a box.
struct Benchmark {
  std::string name;
  std::function<double(const Vector&)> f;
  double lipschitz;
  Vector lo;
  Vector hi;
  /// Closed-form ∇f_ν when known.
  std::function<Vector(const Vector&, double)> smoothed_grad;
};

/// Objective and constraints of every analytic problem, plus |x| and a constant.
inline std::vector<Benchmark> smoothing_benchmarks() {
  std::vector<Benchmark> out;
  for (const auto& name : analytic_problem_names()) {
    const auto p = analytic_problem(name);
    for (std::size_t i = 0; i <= p.num_constraints; ++i) {
      Benchmark b{name + "/f" + std::to_string(i),
                  [p, i](const Vector& x) { return p.value(i, x); }, p.lipschitz, p.box_lo, p.box_hi, {}};
      // Affine and quadratic functions have ∇f_ν = ∇f.
      if (p.has_gradients())
        b.smoothed_grad = [p, i](const Vector& x, double) {
          return Vector(p.jacobian(x).row(static_cast<Eigen::Index>(i)).transpose());
        };
      out.push_back(std::move(b));
    }
  }
  // f_ν(x) = (x² + ν²)/(2ν) for |x| ≤ ν, |x| otherwise.
  out.push_back(Benchmark{"abs", [](const Vector& x) { return std::abs(x[0]); }, 1.0,
                          Vector::Constant(1, -1.0), Vector::Constant(1, 1.0),
                          [](const Vector& x, double nu) {
                            const double v = std::abs(x[0]) <= nu ? x[0] / nu : (x[0] > 0 ? 1.0 : -1.0);
                            return Vector(Vector::Constant(1, v));
                          }});
  out.push_back(Benchmark{"constant", [](const Vector&) { return 0.7; }, 0.0,
                          Vector::Constant(3, -1.0), Vector::Constant(3, 1.0),
                          [](const Vector& x, double) { return Vector(Vector::Zero(x.size())); }});
  return out;
}

inline Vector uniform_in_box(const Vector& lo, const Vector& hi, StreamEngine& eng) {
  Vector x(lo.size());
  for (Eigen::Index c = 0; c < lo.size(); ++c) x[c] = lo[c] + (hi[c] - lo[c]) * eng.uniform();
  return x;
}

/// Smoothed-function properties on every benchmark: value within νL, gradient norm
/// within L, gradient Lipschitz within √d·L/ν, and agreement with closed forms.
inline VerifyReport verify_smoothing(const VerifyOptions& opt, double nu = 0.1) {
  VerifyReport rep{"smoothing", {}};
  constexpr double kRounding = 1.0 + 1e-12;  // exact bounds can be met to the last ulp
  std::uint64_t stream = 0;
  for (const auto& b : smoothing_benchmarks()) {
    const double d = static_cast<double>(b.lo.size());
    const Vector lo = b.lo.array() + nu;
    const Vector hi = b.hi.array() - nu;
    StreamEngine pts(opt.seed, StreamPurpose::kTest, {stream++});
    double worst_value = -1e300, worst_grad = -1e300, worst_lip = -1e300, worst_consistency = -1e300;
    for (std::size_t p = 0; p < opt.points; ++p) {
      const Vector x = uniform_in_box(lo, hi, pts);
      const Vector y = uniform_in_box(lo, hi, pts);
      const auto v = smoothed_value(b.f, x, nu, opt.mc_samples, opt.seed, stream++);
      worst_value = std::max(worst_value, std::abs(v.value - b.f(x)) - kRounding * (nu * b.lipschitz + 4.0 * v.std_err_value));
      const auto gx = smoothed_gradient(b.f, x, nu, opt.mc_samples, opt.seed, stream++);
      const auto gy = smoothed_gradient(b.f, y, nu, opt.mc_samples, opt.seed, stream++);
      worst_grad = std::max(worst_grad, gx.grad.norm() - kRounding * (b.lipschitz + 4.0 * gx.std_err_grad));
      const double lip_bound = std::sqrt(d) * b.lipschitz / nu * (x - y).norm() +
                               8.0 * std::max(gx.std_err_grad, gy.std_err_grad);
      worst_lip = std::max(worst_lip, (gx.grad - gy.grad).norm() - kRounding * lip_bound);
      if (b.smoothed_grad) {
        const Vector closed = b.smoothed_grad(x, nu);
        const double err = (gx.grad - closed).cwiseAbs().maxCoeff();
        worst_consistency = std::max(
            worst_consistency, err - (4.0 * gx.std_err_grad + (kRounding - 1.0) * (1.0 + closed.norm())));
      }
    }
    rep.results.push_back(at_most(b.name + ": max(|f_nu - f| - (nu*L + 4SE))", worst_value, 0.0));
    rep.results.push_back(at_most(b.name + ": max(|grad f_nu| - (L + 4SE))", worst_grad, 0.0));
    rep.results.push_back(at_most(b.name + ": max(gradient change - (sqrt(d)L/nu |x-y| + 8SE))", worst_lip, 0.0));
    if (b.smoothed_grad)
      rep.results.push_back(at_most(b.name + ": max(|grad - closed form| - 4SE)", worst_consistency, 0.0));
  }
  return rep;
}

/// Two linear constraints x₁ − 3 ≤ 0, x₂ − 3 ≤ 0 with a zero objective.
inline ProblemSpec coverage_fixture() {
  ProblemSpec p;
  p.name = "coverage-fixture";
  p.dim = 2;
  p.num_constraints = 2;
  p.evaluate = [](const Vector& x, std::vector<double>& out) {
    out[0] = 0.0;
    out[1] = x[0] - 3.0;
    out[2] = x[1] - 3.0;
  };
  p.lipschitz = 1.0;
  p.grad_lower = 1.0;
  p.noise_sigma = 1.0;
  p.safe_start = Vector::Zero(2);
  p.box_lo = Vector::Constant(2, -4.0);
  p.box_hi = Vector::Constant(2, 4.0);
  return p;
}

/// Coverage of the upper confidence bound F̂ⁱ and of the margin lower bound α̂.
inline VerifyReport verify_coverage(const VerifyOptions& opt, std::size_t repeats = 10'000,
                                    std::size_t n = 10, double delta_bar = 0.1, double nu = 0.1) {
  VerifyReport rep{"coverage", {}};
  const ProblemSpec p = coverage_fixture();
  const Vector x = (Vector(2) << 0.1, 0.2).finished();
  const auto truth = p.values(x);
  const double fc = std::max(truth[1], truth[2]);
  auto fc_fn = [&](const Vector& q) { return p.max_constraint(q); };
  const double fc_nu = smoothed_value(fc_fn, x, nu, 1'000'000, opt.seed, 99).value;

  Oracle oracle(p, NoiseModel{NoiseKind::kGaussian, 1.0, opt.seed});
  std::size_t ucb_hits = 0;
  std::size_t alpha_hits = 0;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto batch = oracle.measure_base(x, n, r);
    const auto fhat = constraint_bounds(batch, p.noise_sigma, delta_bar);
    if (truth[1] <= fhat[0]) ++ucb_hits;
    const double fc_hat = std::max(fhat[0], fhat[1]) + nu * p.lipschitz;
    if (std::abs(fc_hat) <= std::min(std::abs(fc_nu), std::abs(fc))) ++alpha_hits;
  }
  const double reps = static_cast<double>(repeats);
  const double slack = 3.0 * std::sqrt((1.0 - delta_bar) * delta_bar / reps);
  rep.results.push_back(at_least("P{f <= F_hat}", ucb_hits / reps, 1.0 - delta_bar - slack));
  rep.results.push_back(at_least("P{alpha_hat <= min(|f^c_nu|, |f^c|)}", alpha_hits / reps, 1.0 - delta_bar - slack));
  return rep;
}

/// f(x) = ‖x‖² in d = 2 with a slack constraint, measured through the oracle.
inline ProblemSpec quadratic_fixture(double sigma) {
  ProblemSpec p;
  p.name = "quadratic-fixture";
  p.dim = 2;
  p.num_constraints = 1;
  p.evaluate = [](const Vector& x, std::vector<double>& out) {
    out[0] = x.squaredNorm();
    out[1] = x.squaredNorm() - 100.0;
  };
  p.lipschitz = 2.2;  // ‖∇f‖ = 2‖x‖ on the radius-0.1 ball around (1, 0)
  p.grad_lower = 2.0;
  p.noise_sigma = sigma;
  p.safe_start = (Vector(2) << 1.0, 0.0).finished();
  p.box_lo = (Vector(2) << 0.9, -0.1).finished();
  p.box_hi = (Vector(2) << 1.1, 0.1).finished();
  return p;
}

/// Unbiasedness of single-sample estimates of ∇f_ν at (1, 0) and the second-moment
/// deviation bound (d²/n)(L² + 2σ²/ν²).
inline VerifyReport verify_estimator(const VerifyOptions& opt, std::size_t repeats = 100'000,
                                     double nu = 0.1, double sigma = 0.1) {
  VerifyReport rep{"estimator-unbiasedness", {}};
  const ProblemSpec p = quadratic_fixture(sigma);
  const Vector x = p.safe_start;
  const Vector reference = (Vector(2) << 2.0, 0.0).finished();
  Oracle oracle(p, NoiseModel{NoiseKind::kGaussian, sigma, opt.seed});
  Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
  double dev_sq = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto batch = oracle.measure_batch(x, sphere_sample(2, 1, opt.seed, r), nu, r);
    const Vector g = estimate_gradient(batch, Selector::kObjective);
    sum += g;
    sum_sq += g.cwiseProduct(g);
    dev_sq += (g - reference).squaredNorm();
  }
  const double n = static_cast<double>(repeats);
  const Vector mean = sum / n;
  const Vector se = ((sum_sq / n - mean.cwiseProduct(mean)) * n / (n - 1.0)).cwiseSqrt() / std::sqrt(n);
  for (Eigen::Index c = 0; c < 2; ++c)
    rep.results.push_back(at_most("|mean_" + std::to_string(c + 1) + " - grad f_nu| / SE",
                                  std::abs(mean[c] - reference[c]) / se[c], 3.0));
  const double d = 2.0;
  const double bound = d * d * (p.lipschitz * p.lipschitz + 2.0 * sigma * sigma / (nu * nu));
  rep.results.push_back(at_most("E|G - grad f_nu|^2 (n = 1)", dev_sq / n, bound));
  return rep;
}

/// Chi-square goodness of fit of output sampling against its weights.
inline VerifyReport verify_output_law(const VerifyOptions& opt, std::size_t draws = 100'000) {
  VerifyReport rep{"output-law", {}};
  const std::vector<double> weights{1.0, 2.0, 3.0, 4.0};
  std::vector<double> counts(weights.size(), 0.0);
  for (std::size_t i = 0; i < draws; ++i) counts[select_output(weights, opt.seed, i)] += 1.0;
  std::vector<double> probs;
  for (double w : weights) probs.push_back(w / 10.0);
  rep.results.push_back(at_least("chi-square p-value", chi_square_p_value(counts, probs), 0.001));
  return rep;
}

/// Step containment ‖x_{k+1} − x_k‖ ≤ α̂_k/(2L·k^{2/5}) and ground-truth safety on short runs.
inline VerifyReport verify_safety(const VerifyOptions& opt) {
  VerifyReport rep{"safety-containment", {}};
  struct Case {
    ProblemSpec problem;
    AlgoConfig cfg;
  };
  std::vector<Case> cases;
  {
    AlgoConfig c;
    c.eta = 0.05;
    c.max_iters = 500;
    c.samples = 16;
    c.radius_policy = RadiusPolicy::kAdaptive;
    cases.push_back({analytic_problem("linear-ball", 0.01), c});
  }
  {
    AlgoConfig c;
    c.eta = 0.1;
    c.max_iters = 500;
    c.samples = 32;
    cases.push_back({analytic_problem("smooth-2con", 0.01), c});
  }
  {
    AlgoConfig c;
    c.eta = 0.05;
    c.max_iters = 500;
    c.samples = 16;
    c.radius_policy = RadiusPolicy::kAdaptive;
    cases.push_back({analytic_problem("quadratic-halfspace", 0.01), c});
  }
  for (auto& cs : cases) {
    cs.cfg.seed = opt.seed;
    const auto res = run(cs.problem, cs.cfg, NoiseModel{NoiseKind::kGaussian, cs.problem.noise_sigma, opt.seed});
    double worst = 0.0;
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      const auto& rec = res.trace[i];
      if (rec.frozen) continue;
      const Vector next = i + 1 < res.trace.size() ? res.trace[i + 1].x : res.x_final;
      const double bound =
          rec.alpha_hat / (2.0 * cs.problem.lipschitz * std::pow(static_cast<double>(rec.k), 0.4));
      // Forming x - γg rounds each coordinate by at most ε|x_{k+1}|.
      const double rounding = std::numeric_limits<double>::epsilon() * next.norm();
      worst = std::max(worst, ((next - rec.x).norm() - rounding) / bound);
    }
    rep.results.push_back(at_most(cs.problem.name + ": max step / (alpha_hat/(2L k^0.4))", worst, 1.0 + 1e-12));
    rep.results.push_back(at_most(cs.problem.name + ": audit violations",
                                  static_cast<double>(res.audit.violation_count), 0.0));
  }
  return rep;
}

inline std::vector<std::string> suite_names() {
  return {"smoothing", "coverage", "estimator-unbiasedness", "output-law", "safety-containment"};
}

inline std::vector<VerifyReport> verify_properties(const std::string& suite, const VerifyOptions& opt = {}) {
  if (suite == "smoothing") return {verify_smoothing(opt)};
  if (suite == "coverage") return {verify_coverage(opt)};
  if (suite == "estimator-unbiasedness") return {verify_estimator(opt)};
  if (suite == "output-law") return {verify_output_law(opt)};
  if (suite == "safety-containment") return {verify_safety(opt)};
  if (suite == "all") {
    std::vector<VerifyReport> all;
    for (const auto& name : suite_names()) all.push_back(verify_properties(name, opt).front());
    return all;
  }
  throw LookupError("unknown property suite '" + suite + "'");
}

}  // namespace zeloba::harness
