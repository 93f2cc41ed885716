#pragma once

// Stochastic zeroth-order log-barrier method: safe descent on the smoothed barrier
// B_{η,ν}(x) = f⁰_ν(x) − η·log(−f^c_ν(x)) using only noisy function values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/estimator.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/random.hpp"
#include "zeloba/smoothing.hpp"
#include "zeloba/types.hpp"

namespace zeloba {

enum class SamplePolicy { kTheoretical, kFixed };
enum class RadiusPolicy { kFixed, kAdaptive };
enum class MarginPolicy { kHalt, kFreeze };

class DegenerateGradient : public Error {
 public:
  DegenerateGradient() : Error("step size undefined for a zero gradient estimate") {}
};

struct AlgoConfig {
  double eta = 0.01;
  double delta = 0.1;
  std::size_t max_iters = 100;
  SamplePolicy sample_policy = SamplePolicy::kFixed;
  std::size_t samples = 10;          // n for the fixed policy
  std::size_t sample_cap = 100'000;  // refuse (or clamp) theoretical n above this
  bool clamp_to_cap = false;
  RadiusPolicy radius_policy = RadiusPolicy::kFixed;
  std::optional<double> c_override;
  MarginPolicy margin_policy = MarginPolicy::kHalt;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (sample_policy == SamplePolicy::kFixed && samples == 0)
      throw ConfigError("fixed sample count must be positive");
    if (sample_cap == 0) throw ConfigError("sample cap must be positive");
    if (c_override && !(*c_override > 0.0)) throw ConfigError("C override must be positive");
  }
};

/// C = l²/(8L²) unless overridden.
inline double margin_constant(const ProblemSpec& problem, const AlgoConfig& cfg) {
  if (cfg.c_override) return *cfg.c_override;
  return problem.grad_lower * problem.grad_lower / (8.0 * problem.lipschitz * problem.lipschitz);
}

/// ν = Cη/L.
inline double fixed_radius(const ProblemSpec& problem, const AlgoConfig& cfg) {
  return margin_constant(problem, cfg) * cfg.eta / problem.lipschitz;
}

/// δ̄ = δ/(2K+1), the per-bound confidence level after the union bound over iterations.
inline double per_bound_confidence(double delta, std::size_t max_iters) {
  return delta / (2.0 * static_cast<double>(max_iters) + 1.0);
}

/// Σ = (d+1)·√(ln(1/δ) + ln(2K+1))·(√2σ + Lν).
inline double sigma_big(std::size_t d, double delta, std::size_t max_iters, double sigma,
                        double lipschitz, double nu) {
  if (d == 0) throw ContractViolation("sigma_big: dimension must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("sigma_big: delta must lie in (0, 1)");
  if (!(sigma >= 0.0 && lipschitz > 0.0 && nu >= 0.0))
    throw ContractViolation("sigma_big: sigma, L, nu out of domain");
  const double k2 = 2.0 * static_cast<double>(max_iters) + 1.0;
  return (static_cast<double>(d) + 1.0) * std::sqrt(std::log(1.0 / delta) + std::log(k2)) *
         (std::sqrt(2.0) * sigma + lipschitz * nu);
}

/// Unrounded sample bound 4Σ²(C+1)²/(ν²C²L²).
inline double sample_bound(double big_sigma, double nu, double c, double lipschitz) {
  if (!(big_sigma > 0.0 && nu > 0.0 && c > 0.0 && lipschitz > 0.0))
    throw ContractViolation("required_samples: all arguments must be positive");
  const double ratio = big_sigma * (c + 1.0) / (nu * c * lipschitz);
  return 4.0 * ratio * ratio;
}

/// ⌈4Σ²(C+1)²/(ν²C²L²)⌉. Saturates at the largest representable count.
inline std::uint64_t required_samples(double big_sigma, double nu, double c, double lipschitz) {
  const double bound = std::ceil(sample_bound(big_sigma, nu, c, lipschitz));
  if (bound >= 1.8e19) return UINT64_MAX;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(bound));
}

/// γ_k‖g_k‖ = min{α̂/(2L·k^{2/5}), 1/k^{3/5}}: the step length taken at iteration k.
inline double step_weight(std::uint64_t k, double alpha_hat, double lipschitz) {
  if (k == 0) throw ContractViolation("step_weight: iterations are numbered from 1");
  if (!(alpha_hat > 0.0)) throw ContractViolation("step_weight: alpha_hat must be positive");
  const double kd = static_cast<double>(k);
  return std::min(alpha_hat / (2.0 * lipschitz * std::pow(kd, 0.4)), 1.0 / std::pow(kd, 0.6));
}

/// γ_k = (1/‖g_k‖)·min{α̂/(2L·k^{2/5}), 1/k^{3/5}}.
inline double step_size(std::uint64_t k, double alpha_hat, double g_norm, double lipschitz) {
  if (!(g_norm > 0.0)) throw DegenerateGradient();
  return step_weight(k, alpha_hat, lipschitz) / g_norm;
}

/// Samples an index with probability proportional to its weight.
inline std::size_t select_output(std::span<const double> weights, std::uint64_t seed,
                                 std::uint64_t stream = 0) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractViolation("select_output: weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw NoValidOutput("no iterate carries positive output weight");
  StreamEngine eng(seed, StreamPurpose::kOutput, {stream});
  const double target = eng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cumulative += weights[i];
    last_positive = i;
    if (target < cumulative) return i;
  }
  return last_positive;
}

/// Per-constraint multipliers: η/(−F̂ᶜ_ν) split equally over the maximisers of F̂ⁱ,
/// zero elsewhere.
inline std::vector<double> kkt_multipliers(std::span<const double> fhat, double fhat_c_nu, double eta) {
  if (fhat.empty()) throw ContractViolation("kkt_multipliers: no constraint bounds");
  if (!(fhat_c_nu < 0.0)) throw MarginExhausted(fhat_c_nu);
  const double top = *std::max_element(fhat.begin(), fhat.end());
  const auto ties = static_cast<double>(std::count(fhat.begin(), fhat.end(), top));
  const double mass = eta / -fhat_c_nu;
  std::vector<double> lambda(fhat.size(), 0.0);
  for (std::size_t i = 0; i < fhat.size(); ++i)
    if (fhat[i] == top) lambda[i] = mass / ties;
  return lambda;
}

struct IterateRecord {
  std::uint64_t k = 0;
  Vector x;  // x_k, the point measured at iteration k
  std::vector<double> fhat;
  double fhat_c_nu = 0.0;
  double alpha_hat = 0.0;  // 0 on frozen iterations
  double nu = 0.0;
  Vector g;
  double g_norm = 0.0;
  double gamma = 0.0;
  double weight = 0.0;  // γ_k‖g_k‖, the output-sampling weight
  bool frozen = false;
  std::uint64_t scalar_calls_so_far = 0;
  std::uint64_t directions_so_far = 0;
};

struct KktCertificate {
  std::uint64_t R = 0;
  Vector x_R;
  double lambda_R = 0.0;  // η/α̂_R
  double fhat_c_nu = 0.0;
  double nu = 0.0;
  std::vector<double> fhat;
  std::vector<double> lambda_hat;
  std::vector<double> complementarity;  // λ̂ⁱ·(−F̂ⁱ(x_R))
  std::optional<double> stationarity_norm;
};

/// Certificate for the iterate recorded in `rec` (which must not be frozen).
inline KktCertificate certificate_at(const IterateRecord& rec, double eta) {
  if (rec.frozen || !(rec.alpha_hat > 0.0))
    throw ContractViolation("certificate_at: iterate has no certified margin");
  KktCertificate cert;
  cert.R = rec.k;
  cert.x_R = rec.x;
  cert.lambda_R = eta / rec.alpha_hat;
  cert.fhat_c_nu = rec.fhat_c_nu;
  cert.nu = rec.nu;
  cert.fhat = rec.fhat;
  cert.lambda_hat = kkt_multipliers(rec.fhat, rec.fhat_c_nu, eta);
  cert.complementarity.resize(rec.fhat.size());
  for (std::size_t i = 0; i < rec.fhat.size(); ++i)
    cert.complementarity[i] = cert.lambda_hat[i] * -rec.fhat[i];
  return cert;
}

enum class RunStatus { kCompleted, kHalted };

struct RunResult {
  RunStatus status = RunStatus::kCompleted;
  std::string halt_reason;
  std::vector<IterateRecord> trace;
  Vector x_final;  // x_{K+1} (or x₀ when K = 0)
  std::optional<KktCertificate> certificate;
  SafetyAudit audit;
  std::size_t samples_per_iteration = 0;
  std::vector<std::string> warnings;
};

/// Sample count for the configured policy; appends a warning when the cap clamps it.
inline std::size_t resolve_samples(const ProblemSpec& problem, const AlgoConfig& cfg,
                                   std::vector<std::string>* warnings = nullptr) {
  if (cfg.sample_policy == SamplePolicy::kFixed) return cfg.samples;
  const double c = margin_constant(problem, cfg);
  const double nu = fixed_radius(problem, cfg);
  const double big_sigma =
      sigma_big(problem.dim, cfg.delta, cfg.max_iters, problem.noise_sigma, problem.lipschitz, nu);
  const std::uint64_t n = required_samples(big_sigma, nu, c, problem.lipschitz);
  if (n <= cfg.sample_cap) return static_cast<std::size_t>(n);
  const std::string msg = "theoretical sample count " + std::to_string(n) + " exceeds cap " +
                          std::to_string(cfg.sample_cap);
  if (!cfg.clamp_to_cap) throw ConfigError(msg);
  if (warnings) warnings->push_back(msg + "; using the cap");
  return cfg.sample_cap;
}

/// Runs K iterations against `oracle`. The oracle's problem must be `problem`.
inline RunResult run(const ProblemSpec& problem, const AlgoConfig& cfg, Oracle& oracle) {
  cfg.validate();
  problem.validate();
  RunResult result;
  const std::size_t n = resolve_samples(problem, cfg, &result.warnings);
  result.samples_per_iteration = n;

  const double lip = problem.lipschitz;
  const double delta_bar = per_bound_confidence(cfg.delta, cfg.max_iters);
  const double nu_fixed = fixed_radius(problem, cfg);
  Vector x = problem.safe_start;

  for (std::uint64_t k = 1; k <= cfg.max_iters; ++k) {
    IterateRecord rec;
    rec.k = k;
    rec.x = x;

    auto batch = oracle.measure_base(x, n, k);
    rec.fhat = constraint_bounds(batch, problem.noise_sigma, delta_bar);
    const double top = *std::max_element(rec.fhat.begin(), rec.fhat.end());
    if (k == 1 && !(top < 0.0))
      throw InfeasibleStart("noisy upper bounds do not certify the start point as feasible");

    // Adaptive radius: νL = min{η, α̂} with α̂ = −(max F̂ⁱ + νL), solved for ν.
    double nu = nu_fixed;
    if (cfg.radius_policy == RadiusPolicy::kAdaptive)
      nu = top < 0.0 ? std::min(cfg.eta, -top / 2.0) / lip : cfg.eta / lip;
    rec.nu = nu;

    Margin mg;
    try {
      mg = margin(rec.fhat, nu, lip);
    } catch (const MarginExhausted& e) {
      rec.fhat_c_nu = e.fhat_c_nu();
      rec.scalar_calls_so_far = oracle.scalar_calls();
      rec.directions_so_far = oracle.total_directions();
      if (cfg.margin_policy == MarginPolicy::kHalt) {
        result.status = RunStatus::kHalted;
        result.halt_reason = "margin exhausted at iteration " + std::to_string(k);
        break;
      }
      rec.frozen = true;
      result.trace.push_back(std::move(rec));
      continue;
    }
    rec.fhat_c_nu = mg.fhat_c_nu;
    rec.alpha_hat = mg.alpha_hat;

    oracle.measure_perturbed(batch, sphere_sample(problem.dim, n, cfg.seed, k), nu);
    const Vector g0 = estimate_gradient(batch, Selector::kObjective);
    const Vector gc = estimate_gradient(batch, Selector::kMaxConstraint);
    rec.g = barrier_gradient(g0, gc, cfg.eta, rec.alpha_hat);
    rec.g_norm = rec.g.norm();
    if (rec.g_norm > 0.0) {
      rec.weight = step_weight(k, rec.alpha_hat, lip);
      rec.gamma = step_size(k, rec.alpha_hat, rec.g_norm, lip);
      x = x - rec.gamma * rec.g;
    }
    rec.scalar_calls_so_far = oracle.scalar_calls();
    rec.directions_so_far = oracle.total_directions();
    result.trace.push_back(std::move(rec));
  }
  result.x_final = x;

  std::vector<double> weights;
  weights.reserve(result.trace.size());
  for (const auto& rec : result.trace) weights.push_back(rec.weight);
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
    const std::size_t r = select_output(weights, cfg.seed, cfg.max_iters);
    result.certificate = certificate_at(result.trace[r], cfg.eta);
  }
  result.audit = oracle.audit();
  return result;
}

/// Convenience overload that builds its own oracle.
inline RunResult run(const ProblemSpec& problem, const AlgoConfig& cfg, const NoiseModel& noise,
                     std::optional<std::uint64_t> budget_cap = std::nullopt) {
  Oracle oracle(problem, noise, budget_cap);
  return run(problem, cfg, oracle);
}

struct KktResiduals {
  double feasibility = 0.0;      // maxᵢ fⁱ(x_R)
  double complementarity = 0.0;  // maxᵢ λ̂ⁱ·(−fⁱ(x_R))
  double stationarity = 0.0;     // ‖∇f⁰ + Σλ̂ⁱ∇fⁱ‖
};

/// Ground-truth residuals of a certificate. Uses analytic gradients when the problem has
/// them, otherwise smoothed reference gradients at radius ν with n_mc samples.
inline KktResiduals kkt_residuals(const ProblemSpec& problem, const KktCertificate& cert, double nu,
                                  std::size_t n_mc, std::uint64_t seed) {
  const auto f = problem.values(cert.x_R);
  KktResiduals r;
  r.feasibility = *std::max_element(f.begin() + 1, f.end());
  r.complementarity = 0.0;
  for (std::size_t i = 0; i < cert.lambda_hat.size(); ++i)
    r.complementarity = std::max(r.complementarity, cert.lambda_hat[i] * -f[i + 1]);

  Vector lagrangian;
  if (problem.has_gradients()) {
    const Matrix jac = problem.jacobian(cert.x_R);
    lagrangian = jac.row(0).transpose();
    for (std::size_t i = 0; i < cert.lambda_hat.size(); ++i)
      if (cert.lambda_hat[i] != 0.0)
        lagrangian += cert.lambda_hat[i] * jac.row(static_cast<Eigen::Index>(i + 1)).transpose();
  } else {
    auto component = [&](std::size_t i) {
      auto fi = [&](const Vector& p) { return problem.value(i, p); };
      return smoothed_gradient(fi, cert.x_R, nu, n_mc, seed, i).grad;
    };
    lagrangian = component(0);
    for (std::size_t i = 0; i < cert.lambda_hat.size(); ++i)
      if (cert.lambda_hat[i] != 0.0) lagrangian += cert.lambda_hat[i] * component(i + 1);
  }
  r.stationarity = lagrangian.norm();
  return r;
}

/// Iteration-count and sample-count estimates from the convergence analysis.
struct Plan {
  double c = 0.0;
  double nu = 0.0;
  double big_sigma = 0.0;
  double safety_samples = 0.0;       // 4Σ²(C+1)²/(ν²C²L²)
  double convergence_samples = 0.0;  // 4Σ²(1+1/C)²/(C²η⁴)
  double k_descent = 0.0;            // (L·D_f/(Cη²))^{5/2}
  double k_smoothness = 0.0;         // (L²√d(1+1/C)/(C²η³))^{5/3}
  double k_log = 0.0;                // (5 ln(1/η)/(Cη))^5
  double k_required() const { return std::max({k_descent, k_smoothness, k_log}); }
};

/// `barrier_gap` is a user estimate of B_{η,ν}(x₀) − B_{η,ν}(x*); it is not observable.
inline Plan plan(const ProblemSpec& problem, const AlgoConfig& cfg, double barrier_gap) {
  Plan p;
  const double lip = problem.lipschitz;
  const double eta = cfg.eta;
  const double d = static_cast<double>(problem.dim);
  p.c = margin_constant(problem, cfg);
  p.nu = fixed_radius(problem, cfg);
  p.big_sigma = sigma_big(problem.dim, cfg.delta, cfg.max_iters, problem.noise_sigma, lip, p.nu);
  p.safety_samples = sample_bound(p.big_sigma, p.nu, p.c, lip);
  const double inv = 1.0 + 1.0 / p.c;
  p.convergence_samples = 4.0 * p.big_sigma * p.big_sigma * inv * inv / (p.c * p.c * std::pow(eta, 4));
  p.k_descent = std::pow(lip * barrier_gap / (p.c * eta * eta), 2.5);
  p.k_smoothness = std::pow(lip * lip * std::sqrt(d) * inv / (p.c * p.c * std::pow(eta, 3)), 5.0 / 3.0);
  p.k_log = std::pow(5.0 * std::log(1.0 / eta) / (p.c * eta), 5.0);
  return p;
}

}  // namespace zeloba
