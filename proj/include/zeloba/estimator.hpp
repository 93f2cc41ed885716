#pragma once

// Smoothed log-barrier gradient estimate from one measurement batch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/random.hpp"
#include "zeloba/types.hpp"

namespace zeloba {

/// n directions uniform on the unit sphere, direction j drawn from stream (seed, k, j).
inline std::vector<Vector> sphere_sample(std::size_t d, std::size_t n, std::uint64_t seed,
                                         std::uint64_t k) {
  if (d == 0) throw ContractViolation("sphere_sample: dimension must be >= 1");
  if (n == 0) throw ContractViolation("sphere_sample: count must be >= 1");
  std::vector<Vector> dirs;
  dirs.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    StreamEngine eng(seed, StreamPurpose::kDirections, {k, j});
    dirs.push_back(sphere_direction(d, eng));
  }
  return dirs;
}

enum class Selector { kObjective, kMaxConstraint };

namespace detail {

inline double row_value(const Matrix& table, Eigen::Index j, Selector sel) {
  if (sel == Selector::kObjective) return table(j, 0);
  return table.row(j).tail(table.cols() - 1).maxCoeff();
}

}  // namespace detail

/// (1/n)·Σⱼ d·(F(x + νsⱼ) − F(x))/ν · sⱼ. For the max-constraint selector F is the noisy
/// max over constraints taken within each sample row, independently on each side.
inline Vector estimate_gradient(const MeasurementBatch& batch, Selector sel) {
  if (!(batch.nu > 0.0)) throw ContractViolation("estimate_gradient: radius must be positive");
  const std::size_t n = batch.samples();
  if (n == 0 || batch.directions.size() != n)
    throw ContractViolation("estimate_gradient: empty or incomplete batch");
  if (sel == Selector::kMaxConstraint && batch.functions() < 2)
    throw ContractViolation("estimate_gradient: batch holds no constraints");
  const double d = static_cast<double>(batch.x.size());
  Vector acc = Vector::Zero(batch.x.size());
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    const double diff = detail::row_value(batch.perturbed_values, row, sel) -
                        detail::row_value(batch.base_values, row, sel);
    acc += (d * diff / batch.nu) * batch.directions[j];
  }
  return acc / static_cast<double>(n);
}

/// mean + (σ/√n)·√(ln(1/δ̄)).
inline double upper_conf_bound(std::span<const double> base_values, double sigma, double delta_bar) {
  if (base_values.empty()) throw ContractViolation("upper_conf_bound: need at least one value");
  if (!(delta_bar > 0.0 && delta_bar < 1.0))
    throw ContractViolation("upper_conf_bound: confidence level must lie in (0, 1)");
  const double n = static_cast<double>(base_values.size());
  double sum = 0.0;
  for (double v : base_values) sum += v;
  return sum / n + sigma / std::sqrt(n) * std::sqrt(std::log(1.0 / delta_bar));
}

struct Margin {
  double fhat_c_nu = 0.0;
  double alpha_hat = 0.0;
};

/// F̂ᶜ_ν = maxᵢ F̂ⁱ + νL and α̂ = −F̂ᶜ_ν. Throws MarginExhausted when F̂ᶜ_ν ≥ 0.
inline Margin margin(std::span<const double> fhat, double nu, double lipschitz) {
  if (fhat.empty()) throw ContractViolation("margin: no constraint bounds");
  if (!(nu >= 0.0)) throw ContractViolation("margin: radius must be nonnegative");
  const double fc = *std::max_element(fhat.begin(), fhat.end()) + nu * lipschitz;
  if (!(fc < 0.0)) throw MarginExhausted(fc);
  return Margin{fc, -fc};
}

/// g = G⁰ + (η/α̂)·Gᶜ.
inline Vector barrier_gradient(const Vector& g0, const Vector& gc, double eta, double alpha_hat) {
  if (!(alpha_hat > 0.0)) throw ContractViolation("barrier_gradient: alpha_hat must be positive");
  if (!(eta >= 0.0)) throw ContractViolation("barrier_gradient: eta must be nonnegative");
  if (g0.size() != gc.size()) throw ContractViolation("barrier_gradient: size mismatch");
  return g0 + (eta / alpha_hat) * gc;
}

struct GradEstimate {
  Vector g0;
  Vector gc;
  std::vector<double> fhat;  // F̂ⁱ, i = 1..m
  double fhat_c_nu = 0.0;
  double alpha_hat = 0.0;
  std::size_t n_used = 0;
  double nu_used = 0.0;
};

/// Per-constraint upper confidence bounds F̂ⁱ from the base half of a batch.
inline std::vector<double> constraint_bounds(const MeasurementBatch& batch, double sigma,
                                             double delta_bar) {
  const std::size_t m = batch.functions() - 1;
  std::vector<double> fhat(m);
  std::vector<double> column(batch.samples());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < column.size(); ++j)
      column[j] = batch.base_values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i + 1));
    fhat[i] = upper_conf_bound(column, sigma, delta_bar);
  }
  return fhat;
}

/// G⁰, Gᶜ, F̂ⁱ and the margin for a complete batch. Propagates MarginExhausted.
inline GradEstimate estimate(const MeasurementBatch& batch, double sigma, double delta_bar,
                             double lipschitz) {
  GradEstimate est;
  est.fhat = constraint_bounds(batch, sigma, delta_bar);
  const Margin mg = margin(est.fhat, batch.nu, lipschitz);
  est.fhat_c_nu = mg.fhat_c_nu;
  est.alpha_hat = mg.alpha_hat;
  est.g0 = estimate_gradient(batch, Selector::kObjective);
  est.gc = estimate_gradient(batch, Selector::kMaxConstraint);
  est.n_used = batch.samples();
  est.nu_used = batch.nu;
  return est;
}

}  // namespace zeloba
