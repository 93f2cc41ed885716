#pragma once

// Noisy zeroth-order oracle. The solver sees the problem only through this class;
// every queried point is recorded together with its true max-constraint value so
// safety can be certified against ground truth afterwards.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/random.hpp"
#include "zeloba/types.hpp"

namespace zeloba {

enum class NoiseKind { kGaussian, kBoundedUniform, kNone };

inline std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kBoundedUniform: return "bounded-uniform";
    case NoiseKind::kNone: return "none";
  }
  return "?";
}

struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  double sigma = 0.0;
  std::uint64_t master_seed = 0;

  /// ξ for measurement (k, j) of function i on the given side.
  double draw(std::uint64_t k, std::uint64_t j, std::uint64_t i, Side side) const {
    if (kind == NoiseKind::kNone || sigma == 0.0) return 0.0;
    StreamEngine eng(master_seed, StreamPurpose::kNoise,
                     {k, j, i, static_cast<std::uint64_t>(side)});
    if (kind == NoiseKind::kGaussian) return sigma * eng.normal();
    const double half = sigma * std::sqrt(3.0);
    return -half + 2.0 * half * eng.uniform();
  }
};

/// Identifies one scalar measurement.
struct StreamKey {
  std::uint64_t k = 0;
  std::uint64_t j = 0;
  Side side = Side::kBase;
};

/// One iteration's measurements. Row j of each table holds the m+1 function values
/// for sample j; column 0 is the objective.
struct MeasurementBatch {
  std::uint64_t k = 0;
  Vector x;
  std::vector<Vector> directions;
  double nu = 0.0;
  Matrix base_values;
  Matrix perturbed_values;

  std::size_t samples() const { return static_cast<std::size_t>(base_values.rows()); }
  std::size_t functions() const { return static_cast<std::size_t>(base_values.cols()); }
};

enum class AuditTag { kBase, kPerturbed };

struct AuditEntry {
  std::uint64_t k = 0;
  std::uint64_t slot = 0;  // 0 for the base point, j+1 for x + ν·s_j
  AuditTag tag = AuditTag::kBase;
  Vector point;
  double true_fc = 0.0;

  bool violated() const { return true_fc > 0.0; }
};

struct SafetyAudit {
  std::vector<AuditEntry> entries;
  std::uint64_t violation_count = 0;
  std::uint64_t total_scalar_calls = 0;
  std::uint64_t total_directions = 0;
};

class Oracle {
 public:
  Oracle(ProblemSpec problem, NoiseModel noise, std::optional<std::uint64_t> budget_cap = std::nullopt)
      : problem_(std::move(problem)), noise_(noise), budget_cap_(budget_cap) {}

  const ProblemSpec& problem() const { return problem_; }
  const NoiseModel& noise() const { return noise_; }

  std::size_t num_functions() const { return problem_.num_constraints + 1; }

  /// Fⁱ(x, ξ) = fⁱ(x) + ξ with ξ from the stream keyed by (seed, k, j, i, side).
  double measure(std::size_t i, const Vector& x, StreamKey key) {
    if (i >= num_functions()) throw ContractViolation("measure: function index out of range");
    require_finite(x);
    charge(1);
    const auto values = problem_.values(x);
    record_single(x, key, values);
    return values[i] + noise_.draw(key.k, key.j, i, key.side);
  }

  /// Base half of a batch: n fresh noisy measurements of every function at x.
  MeasurementBatch measure_base(const Vector& x, std::size_t n, std::uint64_t k) {
    if (n == 0) throw ContractViolation("measure_base: need at least one sample");
    require_finite(x);
    const std::size_t nf = num_functions();
    charge(n * nf);
    const auto values = problem_.values(x);
    append(k, 0, AuditTag::kBase, x, values);

    MeasurementBatch batch;
    batch.k = k;
    batch.x = x;
    batch.base_values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nf));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nf; ++i)
        batch.base_values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            values[i] + noise_.draw(k, j, i, Side::kBase);
    return batch;
  }

  /// Perturbed half: one noisy measurement of every function at x + ν·s_j per direction.
  void measure_perturbed(MeasurementBatch& batch, std::vector<Vector> directions, double nu) {
    const std::size_t n = batch.samples();
    if (directions.size() != n)
      throw ContractViolation("measure_perturbed: direction count must match base samples");
    if (!(nu >= 0.0)) throw ContractViolation("measure_perturbed: radius must be nonnegative");
    for (const auto& s : directions) {
      if (s.size() != batch.x.size())
        throw ContractViolation("measure_perturbed: direction has wrong dimension");
      if (!(std::abs(s.norm() - 1.0) <= 1e-12))
        throw ContractViolation("measure_perturbed: direction is not unit norm");
    }
    const std::size_t nf = num_functions();
    charge(n * nf);
    batch.nu = nu;
    batch.perturbed_values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nf));
    for (std::size_t j = 0; j < n; ++j) {
      const Vector point = batch.x + nu * directions[j];
      require_finite(point);
      const auto values = problem_.values(point);
      append(batch.k, j + 1, AuditTag::kPerturbed, point, values);
      for (std::size_t i = 0; i < nf; ++i)
        batch.perturbed_values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            values[i] + noise_.draw(batch.k, j, i, Side::kPerturbed);
    }
    batch.directions = std::move(directions);
    total_directions_ += n;
  }

  MeasurementBatch measure_batch(const Vector& x, std::vector<Vector> directions, double nu,
                                 std::uint64_t k) {
    auto batch = measure_base(x, directions.size(), k);
    measure_perturbed(batch, std::move(directions), nu);
    return batch;
  }

  /// Snapshot of the audit in canonical (k, slot) order.
  SafetyAudit audit() const {
    std::lock_guard lock(mutex_);
    SafetyAudit a;
    a.entries = entries_;
    std::stable_sort(a.entries.begin(), a.entries.end(), [](const AuditEntry& l, const AuditEntry& r) {
      return l.k != r.k ? l.k < r.k : l.slot < r.slot;
    });
    a.violation_count = violations_;
    a.total_scalar_calls = scalar_calls_;
    a.total_directions = total_directions_;
    return a;
  }

  std::uint64_t scalar_calls() const { return scalar_calls_; }
  std::uint64_t total_directions() const { return total_directions_; }

 private:
  static void require_finite(const Vector& x) {
    if (!x.allFinite()) throw ContractViolation("oracle: query point is not finite");
  }

  void charge(std::uint64_t calls) {
    std::uint64_t current = scalar_calls_.load();
    do {
      if (budget_cap_ && current + calls > *budget_cap_)
        throw BudgetExhausted("measurement budget of " + std::to_string(*budget_cap_) +
                              " scalar calls exhausted");
    } while (!scalar_calls_.compare_exchange_weak(current, current + calls));
  }

  double true_fc(const std::vector<double>& values) const {
    return *std::max_element(values.begin() + 1, values.end());
  }

  void append(std::uint64_t k, std::uint64_t slot, AuditTag tag, const Vector& x,
              const std::vector<double>& values) {
    const double fc = true_fc(values);
    std::lock_guard lock(mutex_);
    entries_.push_back(AuditEntry{k, slot, tag, x, fc});
    if (fc > 0.0) ++violations_;
  }

  // A single measurement audits its point the first time (k, slot) is seen.
  void record_single(const Vector& x, StreamKey key, const std::vector<double>& values) {
    const std::uint64_t slot = key.side == Side::kBase ? 0 : key.j + 1;
    {
      std::lock_guard lock(mutex_);
      for (auto it = entries_.rbegin(); it != entries_.rend() && it->k == key.k; ++it)
        if (it->slot == slot) return;
    }
    append(key.k, slot, key.side == Side::kBase ? AuditTag::kBase : AuditTag::kPerturbed, x, values);
    if (key.side == Side::kPerturbed) ++total_directions_;
  }

  ProblemSpec problem_;
  NoiseModel noise_;
  std::optional<std::uint64_t> budget_cap_;
  std::atomic<std::uint64_t> scalar_calls_{0};
  std::atomic<std::uint64_t> total_directions_{0};
  mutable std::mutex mutex_;
  std::vector<AuditEntry> entries_;
  std::uint64_t violations_ = 0;
};

}  // namespace zeloba
