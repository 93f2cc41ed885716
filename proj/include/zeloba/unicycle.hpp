#pragma once

// Unicycle controller-design benchmark. The gain matrix U (2×3) maps the state
// q = (x, y, θ) to the input u = (v, ω); the problem variable is U flattened
// row-major, so d = 6 and there is one obstacle constraint per time step.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/types.hpp"

namespace zeloba::unicycle {

using State = Eigen::Vector3d;
using Gain = Eigen::Matrix<double, 2, 3>;

enum class Feedback {
  kState,  // u_t = U·q_t
  kError,  // u_t = U·(q_t − q_B)
};

struct Config {
  std::size_t horizon = 30;
  double dt = 0.1;
  State start = State(0.0, 0.0, 0.0);
  State goal = State(4.0, 4.0, 0.0);
  Eigen::Vector2d obstacle_center = Eigen::Vector2d(2.0, 2.0);
  double obstacle_radius = 1.0;
  Gain initial_gain = (Gain() << -0.2, 0.0, 0.0, 0.0, -0.2, 0.0).finished();
  Feedback feedback = Feedback::kState;
  double v_max = 2.0;
  double omega_max = 2.0;

  void validate() const {
    if (horizon == 0) throw ContractViolation("unicycle: horizon must be positive");
    if (!(dt > 0.0)) throw ContractViolation("unicycle: dt must be positive");
    if (!(obstacle_radius > 0.0)) throw ContractViolation("unicycle: obstacle radius must be positive");
    if (!(v_max > 0.0 && omega_max > 0.0))
      throw ContractViolation("unicycle: input bounds must be positive");
  }
};

/// sin(z)/z with sinc(0) = 1.
inline double sinc(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

/// Exact integration of ẋ = v cos θ, ẏ = v sin θ, θ̇ = ω over one period with
/// piecewise-constant (v, ω).
inline State step(const State& q, double v, double omega, double dt) {
  const double half = 0.5 * dt * omega;
  const double arc = v * dt * sinc(half);
  return State(q[0] + arc * std::cos(q[2] + half), q[1] + arc * std::sin(q[2] + half),
               q[2] + dt * omega);
}

inline Gain gain_from_vector(const Vector& x) {
  if (x.size() != 6) throw ContractViolation("unicycle: gain vector must have 6 entries");
  Gain u;
  u << x[0], x[1], x[2], x[3], x[4], x[5];
  return u;
}

inline Vector gain_to_vector(const Gain& u) {
  Vector x(6);
  x << u(0, 0), u(0, 1), u(0, 2), u(1, 0), u(1, 1), u(1, 2);
  return x;
}

/// Returns q_0 … q_T. Throws DivergedTrajectory on a non-finite state.
inline std::vector<State> simulate(const Gain& gain, const Config& cfg) {
  std::vector<State> traj;
  traj.reserve(cfg.horizon + 1);
  traj.push_back(cfg.start);
  State q = cfg.start;
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    const State fb = cfg.feedback == Feedback::kError ? State(q - cfg.goal) : q;
    const Eigen::Vector2d u = gain * fb;
    const double v = std::clamp(u[0], -cfg.v_max, cfg.v_max);
    const double omega = std::clamp(u[1], -cfg.omega_max, cfg.omega_max);
    q = step(q, v, omega, cfg.dt);
    if (!q.allFinite()) throw DivergedTrajectory(t + 1);
    traj.push_back(q);
  }
  return traj;
}

/// (1/T)·Σ_{t=1}^{T} ‖q_t − q_B‖².
inline double objective(const std::vector<State>& traj, const Config& cfg) {
  double sum = 0.0;
  for (std::size_t t = 1; t < traj.size(); ++t) sum += (traj[t] - cfg.goal).squaredNorm();
  return sum / static_cast<double>(cfg.horizon);
}

/// r² − ‖(x_t, y_t) − (x_C, y_C)‖²; negative means the obstacle is avoided.
inline double obstacle_constraint(const State& q, const Config& cfg) {
  const Eigen::Vector2d offset = q.head<2>() - cfg.obstacle_center;
  return cfg.obstacle_radius * cfg.obstacle_radius - offset.squaredNorm();
}

inline double objective(const Gain& gain, const Config& cfg) {
  return objective(simulate(gain, cfg), cfg);
}

inline double constraint(const Gain& gain, std::size_t t, const Config& cfg) {
  if (t < 1 || t > cfg.horizon) throw ContractViolation("unicycle: step index outside 1..T");
  return obstacle_constraint(simulate(gain, cfg)[t], cfg);
}

/// Problem with m = T obstacle constraints. Throws if the initial gain is unsafe.
inline ProblemSpec make_problem(const Config& cfg, double lipschitz = 40.0,
                                double grad_lower = 1.0, double noise_sigma = 0.0) {
  cfg.validate();
  ProblemSpec p;
  p.name = "unicycle";
  p.dim = 6;
  p.num_constraints = cfg.horizon;
  p.evaluate = [cfg](const Vector& x, std::vector<double>& out) {
    const auto traj = simulate(gain_from_vector(x), cfg);
    out[0] = objective(traj, cfg);
    for (std::size_t t = 1; t <= cfg.horizon; ++t) out[t] = obstacle_constraint(traj[t], cfg);
  };
  p.lipschitz = lipschitz;
  p.grad_lower = grad_lower;
  p.noise_sigma = noise_sigma;
  p.safe_start = gain_to_vector(cfg.initial_gain);
  p.box_lo = p.safe_start.array() - 0.1;
  p.box_hi = p.safe_start.array() + 0.1;
  p.validate();
  return p;
}

}  // namespace zeloba::unicycle
