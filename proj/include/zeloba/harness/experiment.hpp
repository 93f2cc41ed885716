#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "zeloba/harness/config.hpp"
#include "zeloba/harness/io.hpp"
#include "zeloba/solver.hpp"

namespace zeloba::harness {

struct TrialSummary {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string status;  // "completed" or "halted"
  std::size_t iterations = 0;
  std::size_t samples_per_iteration = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;  // true f⁰ at the last iterate
  double best_objective = 0.0;   // lowest true f⁰ along the trace
  double final_max_constraint = 0.0;
  std::optional<std::uint64_t> R;
  std::vector<double> x_R;
  std::optional<double> lambda_R;
  std::optional<double> kkt_feasibility;
  std::optional<double> kkt_complementarity;
  std::optional<double> kkt_stationarity;
  std::uint64_t violation_count = 0;
  std::uint64_t total_scalar_calls = 0;
  std::uint64_t total_directions = 0;
  double wall_time = 0.0;  // seconds
  std::vector<std::string> warnings;

  bool operator==(const TrialSummary&) const = default;
};

struct AggregateSummary {
  double median_objective = 0.0;
  double min_objective = 0.0;
  double max_objective = 0.0;
  std::uint64_t total_violations = 0;

  bool operator==(const AggregateSummary&) const = default;
};

struct RunSummary {
  std::string problem;
  std::string preset;
  std::vector<TrialSummary> trials;
  AggregateSummary aggregate;

  bool operator==(const RunSummary&) const = default;
};

inline AggregateSummary aggregate(const std::vector<TrialSummary>& trials) {
  AggregateSummary agg;
  if (trials.empty()) return agg;
  std::vector<double> f;
  for (const auto& t : trials) {
    f.push_back(t.final_objective);
    agg.total_violations += t.violation_count;
  }
  std::sort(f.begin(), f.end());
  const std::size_t n = f.size();
  agg.median_objective = n % 2 ? f[n / 2] : 0.5 * (f[n / 2 - 1] + f[n / 2]);
  agg.min_objective = f.front();
  agg.max_objective = f.back();
  return agg;
}

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline nlohmann::json to_json(const RunSummary& s) {
  using nlohmann::json;
  json trials = json::array();
  for (const auto& t : s.trials) {
    json j{{"trial", t.trial},
           {"seed", t.seed},
           {"status", t.status},
           {"iterations", t.iterations},
           {"samples_per_iteration", t.samples_per_iteration},
           {"initial_objective", t.initial_objective},
           {"final_objective", t.final_objective},
           {"best_objective", t.best_objective},
           {"final_max_constraint", t.final_max_constraint},
           {"x_R", t.x_R},
           {"violation_count", t.violation_count},
           {"total_scalar_calls", t.total_scalar_calls},
           {"total_directions", t.total_directions},
           {"wall_time", t.wall_time},
           {"warnings", t.warnings}};
    put_optional(j, "R", t.R);
    put_optional(j, "lambda_R", t.lambda_R);
    put_optional(j, "kkt_feasibility", t.kkt_feasibility);
    put_optional(j, "kkt_complementarity", t.kkt_complementarity);
    put_optional(j, "kkt_stationarity", t.kkt_stationarity);
    trials.push_back(std::move(j));
  }
  return json{{"problem", s.problem},
              {"preset", s.preset},
              {"trials", trials},
              {"aggregate",
               {{"median_objective", s.aggregate.median_objective},
                {"min_objective", s.aggregate.min_objective},
                {"max_objective", s.aggregate.max_objective},
                {"total_violations", s.aggregate.total_violations}}}};
}

inline RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.problem = j.at("problem").get<std::string>();
  s.preset = j.at("preset").get<std::string>();
  for (const auto& tj : j.at("trials")) {
    TrialSummary t;
    t.trial = tj.at("trial").get<std::size_t>();
    t.seed = tj.at("seed").get<std::uint64_t>();
    t.status = tj.at("status").get<std::string>();
    t.iterations = tj.at("iterations").get<std::size_t>();
    t.samples_per_iteration = tj.at("samples_per_iteration").get<std::size_t>();
    t.initial_objective = tj.at("initial_objective").get<double>();
    t.final_objective = tj.at("final_objective").get<double>();
    t.best_objective = tj.at("best_objective").get<double>();
    t.final_max_constraint = tj.at("final_max_constraint").get<double>();
    t.x_R = tj.at("x_R").get<std::vector<double>>();
    t.violation_count = tj.at("violation_count").get<std::uint64_t>();
    t.total_scalar_calls = tj.at("total_scalar_calls").get<std::uint64_t>();
    t.total_directions = tj.at("total_directions").get<std::uint64_t>();
    t.wall_time = tj.at("wall_time").get<double>();
    t.warnings = tj.at("warnings").get<std::vector<std::string>>();
    t.R = get_optional<std::uint64_t>(tj, "R");
    t.lambda_R = get_optional<double>(tj, "lambda_R");
    t.kkt_feasibility = get_optional<double>(tj, "kkt_feasibility");
    t.kkt_complementarity = get_optional<double>(tj, "kkt_complementarity");
    t.kkt_stationarity = get_optional<double>(tj, "kkt_stationarity");
    s.trials.push_back(std::move(t));
  }
  const auto& a = j.at("aggregate");
  s.aggregate.median_objective = a.at("median_objective").get<double>();
  s.aggregate.min_objective = a.at("min_objective").get<double>();
  s.aggregate.max_objective = a.at("max_objective").get<double>();
  s.aggregate.total_violations = a.at("total_violations").get<std::uint64_t>();
  return s;
}

/// One trial's solver output together with its summary entry.
struct TrialOutcome {
  TrialSummary summary;
  RunResult result;
};

inline TrialOutcome run_trial(const ExperimentConfig& cfg, const ProblemSpec& problem, std::size_t t) {
  const auto start = std::chrono::steady_clock::now();
  AlgoConfig algo = cfg.algo;
  algo.seed = cfg.trial_seed(t);
  const NoiseModel noise{cfg.noise_kind, cfg.noise_sigma, algo.seed};

  TrialOutcome out;
  out.result = run(problem, algo, noise, cfg.budget_cap);
  const auto& res = out.result;
  auto& s = out.summary;
  s.trial = t;
  s.seed = algo.seed;
  s.status = res.status == RunStatus::kCompleted ? "completed" : "halted";
  s.iterations = res.trace.size();
  s.samples_per_iteration = res.samples_per_iteration;
  s.initial_objective = problem.objective(problem.safe_start);
  const auto final_truth = truth_at(problem, res.x_final);
  s.final_objective = final_truth.objective;
  s.final_max_constraint = final_truth.max_constraint;
  s.best_objective = std::min(s.initial_objective, s.final_objective);
  for (const auto& rec : res.trace) s.best_objective = std::min(s.best_objective, problem.objective(rec.x));
  if (res.certificate) {
    const auto& cert = *res.certificate;
    s.R = cert.R;
    s.x_R.assign(cert.x_R.data(), cert.x_R.data() + cert.x_R.size());
    s.lambda_R = cert.lambda_R;
    const double ref_nu = cert.nu > 0.0 ? cert.nu : fixed_radius(problem, algo);
    const auto r = kkt_residuals(problem, cert, ref_nu, cfg.kkt_mc_samples, algo.seed);
    s.kkt_feasibility = r.feasibility;
    s.kkt_complementarity = r.complementarity;
    s.kkt_stationarity = r.stationarity;
  } else {
    s.x_R.assign(res.x_final.data(), res.x_final.data() + res.x_final.size());
  }
  s.violation_count = res.audit.violation_count;
  s.total_scalar_calls = res.audit.total_scalar_calls;
  s.total_directions = res.audit.total_directions;
  s.warnings = res.warnings;
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Output directory after applying the ZELOBA_OUTPUT_DIR override.
inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("ZELOBA_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

/// Runs every trial (concurrently, up to cfg.threads at a time) and writes the
/// per-trial trace/audit CSVs and the summary JSON.
inline RunSummary run_experiment(const ExperimentConfig& cfg) {
  const ProblemSpec problem = build_problem(cfg);
  const auto dir = resolve_output_dir(cfg);
  const bool writes = cfg.emit.trace_csv || cfg.emit.audit_csv || cfg.emit.summary_json;
  if (writes) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  }

  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.trials);

  RunSummary summary;
  summary.problem = problem.name;
  summary.preset = cfg.preset;
  summary.trials.resize(cfg.trials);

  auto finish = [&](std::size_t t) {
    TrialOutcome out = run_trial(cfg, problem, t);
    const std::string stem = "trial_" + std::to_string(t);
    if (cfg.emit.trace_csv) write_file_atomic(dir / (stem + "_trace.csv"), trace_csv(problem, out.result));
    if (cfg.emit.audit_csv) write_file_atomic(dir / (stem + "_audit.csv"), audit_csv(problem.dim, out.result.audit));
    summary.trials[t] = std::move(out.summary);
  };

  for (std::size_t first = 0; first < cfg.trials; first += workers) {
    std::vector<std::future<void>> batch;
    for (std::size_t t = first; t < std::min(cfg.trials, first + workers); ++t)
      batch.push_back(std::async(std::launch::async, finish, t));
    for (auto& f : batch) f.get();
  }

  summary.aggregate = aggregate(summary.trials);
  if (cfg.emit.summary_json) write_file_atomic(dir / "summary.json", to_json(summary).dump(2) + "\n");
  return summary;
}

}  // namespace zeloba::harness
