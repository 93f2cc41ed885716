#pragma once

// Monte-Carlo reference for ν-smoothed functions f_ν(x) = E_b f(x + νb), b uniform in
// the unit ball. A test and diagnostics instrument: it calls exact evaluators directly
// and is never on the solver's decision path.

#include <cmath>
#include <cstdint>
#include <utility>

#include "zeloba/errors.hpp"
#include "zeloba/random.hpp"
#include "zeloba/types.hpp"

namespace zeloba {

struct SmoothedEval {
  double value = 0.0;
  Vector grad;
  std::size_t n_mc = 0;
  double std_err_value = 0.0;
  double std_err_grad = 0.0;  // largest componentwise standard error
};

namespace detail {

// Welford accumulator; a constant stream yields its value exactly.
struct RunningMoments {
  std::size_t count = 0;
  Vector mean;
  Vector m2;

  explicit RunningMoments(Eigen::Index dim) : mean(Vector::Zero(dim)), m2(Vector::Zero(dim)) {}

  void add(const Vector& v) {
    ++count;
    const Vector delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta.cwiseProduct(v - mean);
  }

  Vector std_err() const {
    if (count < 2) return Vector::Zero(mean.size());
    const double n = static_cast<double>(count);
    return (m2 / (n - 1.0)).cwiseSqrt() / std::sqrt(n);
  }
};

}  // namespace detail

/// Monte-Carlo estimate of f_ν(x) over n_mc uniform-ball draws from stream `stream`.
template <class Fn>
SmoothedEval smoothed_value(Fn&& f, const Vector& x, double nu, std::size_t n_mc,
                            std::uint64_t seed, std::uint64_t stream = 0) {
  if (!(nu >= 0.0)) throw ContractViolation("smoothed_value: radius must be nonnegative");
  if (n_mc == 0) throw ContractViolation("smoothed_value: need at least one sample");
  const auto d = static_cast<std::size_t>(x.size());
  detail::RunningMoments acc(1);
  Vector v(1);
  for (std::size_t s = 0; s < n_mc; ++s) {
    StreamEngine eng(seed, StreamPurpose::kMonteCarlo, {stream, 0, s});
    v[0] = f(Vector(x + nu * ball_point(d, eng)));
    acc.add(v);
  }
  SmoothedEval out;
  out.value = acc.mean[0];
  out.n_mc = n_mc;
  out.std_err_value = acc.std_err()[0];
  return out;
}

/// Monte-Carlo estimate of ∇f_ν(x) = E_s d·(f(x+νs) − f(x))/ν·s, s uniform on the sphere.
template <class Fn>
SmoothedEval smoothed_gradient(Fn&& f, const Vector& x, double nu, std::size_t n_mc,
                               std::uint64_t seed, std::uint64_t stream = 0) {
  if (!(nu > 0.0)) throw ContractViolation("smoothed_gradient: radius must be positive");
  if (n_mc == 0) throw ContractViolation("smoothed_gradient: need at least one sample");
  const auto d = static_cast<std::size_t>(x.size());
  const double fx = f(x);
  detail::RunningMoments acc(x.size());
  for (std::size_t s = 0; s < n_mc; ++s) {
    StreamEngine eng(seed, StreamPurpose::kMonteCarlo, {stream, 1, s});
    const Vector dir = sphere_direction(d, eng);
    const double diff = f(Vector(x + nu * dir)) - fx;
    acc.add((static_cast<double>(d) * diff / nu) * dir);
  }
  SmoothedEval out;
  out.grad = acc.mean;
  out.n_mc = n_mc;
  out.std_err_grad = acc.std_err().maxCoeff();
  return out;
}

struct BarrierEval {
  double value = 0.0;  // B_{η,ν}(x)
  Vector grad;         // ∇B_{η,ν}(x)
  SmoothedEval objective;
  SmoothedEval max_constraint;
};

/// B_{η,ν}(x) = f⁰_ν(x) − η·log(−f^c_ν(x)) and its gradient, composed from reference
/// estimates of f⁰ and fᶜ = maxᵢ fⁱ. Throws OutsideDomain unless f^c_ν(x) < −4·SE.
inline BarrierEval barrier_value_and_grad(const ProblemSpec& problem, const Vector& x, double eta,
                                          double nu, std::size_t n_mc, std::uint64_t seed) {
  auto f0 = [&](const Vector& p) { return problem.objective(p); };
  auto fc = [&](const Vector& p) { return problem.max_constraint(p); };

  BarrierEval out;
  out.objective = smoothed_value(f0, x, nu, n_mc, seed, 0);
  out.max_constraint = smoothed_value(fc, x, nu, n_mc, seed, 1);
  const double fc_nu = out.max_constraint.value;
  if (!(fc_nu < -4.0 * out.max_constraint.std_err_value))
    throw OutsideDomain("smoothed max-constraint is not certifiably negative at the query point");

  const auto g0 = smoothed_gradient(f0, x, nu, n_mc, seed, 2);
  const auto gc = smoothed_gradient(fc, x, nu, n_mc, seed, 3);
  out.objective.grad = g0.grad;
  out.objective.std_err_grad = g0.std_err_grad;
  out.max_constraint.grad = gc.grad;
  out.max_constraint.std_err_grad = gc.std_err_grad;

  out.value = out.objective.value - eta * std::log(-fc_nu);
  out.grad = g0.grad + (eta / -fc_nu) * gc.grad;
  return out;
}

/// (√d·L/ν)(1 + 2η/α̂) + 4L²η/α̂²: local smoothness of the barrier within one step of x_k.
inline double local_smoothness_bound(double alpha_hat, double eta, double nu, double lipschitz,
                                     std::size_t d) {
  if (!(alpha_hat > 0.0)) throw ContractViolation("local_smoothness_bound: alpha_hat must be positive");
  if (!(nu > 0.0)) throw ContractViolation("local_smoothness_bound: radius must be positive");
  const double m_nu = std::sqrt(static_cast<double>(d)) * lipschitz / nu;
  return m_nu * (1.0 + 2.0 * eta / alpha_hat) +
         4.0 * lipschitz * lipschitz * eta / (alpha_hat * alpha_hat);
}

}  // namespace zeloba
