#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zeloba/errors.hpp"

namespace zeloba {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Evaluates all functions at once: out[0] = f⁰(x), out[i] = fⁱ(x) for i = 1..m.
/// Batched because expensive black boxes (e.g. a simulated trajectory) share work
/// across the objective and every constraint.
using BatchEvaluator = std::function<void(const Vector& x, std::vector<double>& out)>;

/// Rows are ∇fⁱ(x)ᵀ for i = 0..m.
using JacobianEvaluator = std::function<Matrix(const Vector& x)>;

/// Known solution of an analytic benchmark.
struct KnownSolution {
  Vector x;
  std::vector<double> lambda;  // per constraint
  double objective = 0.0;
};

/// A black-box constrained problem: min f⁰(x) s.t. fⁱ(x) ≤ 0, i = 1..m.
///
/// The exact evaluators are only ever reached through the oracle (with noise and
/// audit) by the solver; tests and the smoothing reference may call them directly.
struct ProblemSpec {
  std::string name;
  std::size_t dim = 0;
  std::size_t num_constraints = 0;
  BatchEvaluator evaluate;
  JacobianEvaluator jacobian;  // empty when gradients are unavailable
  double lipschitz = 1.0;      // L, common to all fⁱ
  double grad_lower = 1.0;     // l, lower bound on ‖∇f^c_ν‖ near the boundary
  double noise_sigma = 0.0;    // declared sub-Gaussian parameter σ
  Vector safe_start;
  /// Box on which the declared Lipschitz constant is claimed to hold.
  Vector box_lo;
  Vector box_hi;
  std::optional<KnownSolution> solution;

  std::vector<double> values(const Vector& x) const {
    std::vector<double> out(num_constraints + 1);
    evaluate(x, out);
    return out;
  }

  double value(std::size_t i, const Vector& x) const {
    if (i > num_constraints) throw ContractViolation("function index out of range");
    return values(x)[i];
  }

  double objective(const Vector& x) const { return values(x)[0]; }

  /// fᶜ(x) = maxᵢ fⁱ(x).
  double max_constraint(const Vector& x) const {
    const auto v = values(x);
    return *std::max_element(v.begin() + 1, v.end());
  }

  bool has_gradients() const { return static_cast<bool>(jacobian); }

  /// Checks the structural invariants; throws ContractViolation on failure.
  void validate() const {
    if (dim == 0) throw ContractViolation(name + ": dimension must be positive");
    if (num_constraints == 0) throw ContractViolation(name + ": needs at least one constraint");
    if (!evaluate) throw ContractViolation(name + ": missing evaluator");
    if (!(lipschitz > 0.0)) throw ContractViolation(name + ": lipschitz constant must be positive");
    if (!(grad_lower > 0.0 && grad_lower <= lipschitz))
      throw ContractViolation(name + ": require 0 < l <= L");
    if (!(noise_sigma >= 0.0)) throw ContractViolation(name + ": noise sigma must be nonnegative");
    if (static_cast<std::size_t>(safe_start.size()) != dim)
      throw ContractViolation(name + ": safe start has wrong dimension");
    if (!(max_constraint(safe_start) < 0.0))
      throw ContractViolation(name + ": safe start is not strictly feasible");
  }
};

}  // namespace zeloba
