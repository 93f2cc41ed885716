#pragma once

// Analytic benchmarks with closed-form KKT points.

#include <cmath>
#include <string>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/types.hpp"

namespace zeloba {

/// min c·x  s.t. ‖x‖² − 1 ≤ 0.  Optimum x* = −c/‖c‖, λ* = ‖c‖/2.
inline ProblemSpec linear_ball(const Vector& c, double noise_sigma = 0.0) {
  const double cn = c.norm();
  if (!(cn > 0.0)) throw ContractViolation("linear-ball: c must be nonzero");
  const auto d = static_cast<std::size_t>(c.size());
  const double half_width = 1.05;

  ProblemSpec p;
  p.name = "linear-ball";
  p.dim = d;
  p.num_constraints = 1;
  p.evaluate = [c](const Vector& x, std::vector<double>& out) {
    out[0] = c.dot(x);
    out[1] = x.squaredNorm() - 1.0;
  };
  p.jacobian = [c](const Vector& x) {
    Matrix j(2, x.size());
    j.row(0) = c.transpose();
    j.row(1) = 2.0 * x.transpose();
    return j;
  };
  p.box_lo = Vector::Constant(c.size(), -half_width);
  p.box_hi = Vector::Constant(c.size(), half_width);
  // ‖∇f¹‖ = 2‖x‖ is largest at the box corners.
  p.lipschitz = std::max(cn, 2.0 * half_width * std::sqrt(static_cast<double>(d)));
  p.grad_lower = 1.8;
  p.noise_sigma = noise_sigma;
  p.safe_start = Vector::Zero(c.size());
  p.solution = KnownSolution{-c / cn, {cn / 2.0}, -cn};
  p.validate();
  return p;
}

/// min ‖x − x̄‖²  s.t. a·x − b ≤ 0, with x̄ infeasible so the optimum is its projection.
inline ProblemSpec quadratic_halfspace(const Vector& xbar, const Vector& a, double b,
                                       double noise_sigma = 0.0) {
  if (xbar.size() != a.size()) throw ContractViolation("quadratic-halfspace: size mismatch");
  const double an2 = a.squaredNorm();
  if (!(an2 > 0.0)) throw ContractViolation("quadratic-halfspace: a must be nonzero");
  const double excess = a.dot(xbar) - b;
  if (!(excess > 0.0)) throw ContractViolation("quadratic-halfspace: x̄ must be infeasible");

  ProblemSpec p;
  p.name = "quadratic-halfspace";
  p.dim = static_cast<std::size_t>(a.size());
  p.num_constraints = 1;
  p.evaluate = [xbar, a, b](const Vector& x, std::vector<double>& out) {
    out[0] = (x - xbar).squaredNorm();
    out[1] = a.dot(x) - b;
  };
  p.jacobian = [xbar, a](const Vector& x) {
    Matrix j(2, x.size());
    j.row(0) = 2.0 * (x - xbar).transpose();
    j.row(1) = a.transpose();
    return j;
  };
  // Start one unit (in constraint value) inside the halfspace.
  p.safe_start = ((b - 1.0) / an2) * a;
  const double half_width = 1.5;
  p.box_lo = p.safe_start.array() - half_width;
  p.box_hi = p.safe_start.array() + half_width;
  // Farthest box corner from x̄ bounds ‖∇f⁰‖ = 2‖x − x̄‖.
  Vector far(a.size());
  for (Eigen::Index c = 0; c < a.size(); ++c)
    far[c] = std::max(std::abs(p.box_lo[c] - xbar[c]), std::abs(p.box_hi[c] - xbar[c]));
  p.lipschitz = std::max(2.0 * far.norm(), std::sqrt(an2));
  p.grad_lower = std::sqrt(an2);
  p.noise_sigma = noise_sigma;
  const Vector xstar = xbar - (excess / an2) * a;
  p.solution = KnownSolution{xstar, {2.0 * excess / an2}, (xstar - xbar).squaredNorm()};
  p.validate();
  return p;
}

/// min x₂  s.t. ‖x − (−½, 0)‖² − 1 ≤ 0, ‖x − (½, 0)‖² − 1 ≤ 0.
/// The feasible lens has its lowest point (0, −√¾) on both circles, so both constraints
/// are active at the optimum with λ¹ = λ² = 1/(2√3).
inline ProblemSpec smooth_two_constraint(double noise_sigma = 0.0) {
  const Vector left = (Vector(2) << -0.5, 0.0).finished();
  const Vector right = (Vector(2) << 0.5, 0.0).finished();

  ProblemSpec p;
  p.name = "smooth-2con";
  p.dim = 2;
  p.num_constraints = 2;
  p.evaluate = [left, right](const Vector& x, std::vector<double>& out) {
    out[0] = x[1];
    out[1] = (x - left).squaredNorm() - 1.0;
    out[2] = (x - right).squaredNorm() - 1.0;
  };
  p.jacobian = [left, right](const Vector& x) {
    Matrix j(3, 2);
    j.row(0) << 0.0, 1.0;
    j.row(1) = 2.0 * (x - left).transpose();
    j.row(2) = 2.0 * (x - right).transpose();
    return j;
  };
  p.box_lo = (Vector(2) << -0.6, -1.0).finished();
  p.box_hi = (Vector(2) << 0.6, 1.0).finished();
  p.lipschitz = 3.0;  // 2·‖(1.1, 1)‖ ≈ 2.97
  p.grad_lower = 1.5;  // ‖∇fᶜ‖ ≥ √3 on the lens boundary
  p.noise_sigma = noise_sigma;
  p.safe_start = Vector::Zero(2);
  const double y = -std::sqrt(0.75);
  const double lam = 1.0 / (2.0 * std::sqrt(3.0));
  p.solution = KnownSolution{(Vector(2) << 0.0, y).finished(), {lam, lam}, y};
  p.validate();
  return p;
}

inline std::vector<std::string> analytic_problem_names() {
  return {"linear-ball", "quadratic-halfspace", "smooth-2con"};
}

/// Registered analytic problems with their default parameters.
inline ProblemSpec analytic_problem(const std::string& name, double noise_sigma = 0.0) {
  if (name == "linear-ball") return linear_ball((Vector(2) << 1.0, 0.0).finished(), noise_sigma);
  if (name == "quadratic-halfspace")
    return quadratic_halfspace((Vector(2) << 2.0, 0.0).finished(),
                               (Vector(2) << 1.0, 0.0).finished(), 1.0, noise_sigma);
  if (name == "smooth-2con") return smooth_two_constraint(noise_sigma);
  throw LookupError("unknown analytic problem '" + name + "'");
}

}  // namespace zeloba
