#pragma once

// Experiment configuration: a JSON document, optionally seeded from a named preset.
// User fields are merged over the preset (RFC 7386 merge patch), then validated with
// field-level error messages.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "zeloba/errors.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/problems.hpp"
#include "zeloba/solver.hpp"
#include "zeloba/unicycle.hpp"

namespace zeloba::harness {

using json = nlohmann::json;

struct ProblemConfig {
  std::string name = "linear-ball";
  std::optional<double> lipschitz;
  std::optional<double> grad_lower;
  std::vector<double> c;     // linear-ball
  std::vector<double> xbar;  // quadratic-halfspace
  std::vector<double> a;
  std::optional<double> b;
  unicycle::Config unicycle;
};

struct EmitFlags {
  bool trace_csv = true;
  bool audit_csv = true;
  bool summary_json = true;
};

struct ExperimentConfig {
  std::string preset;
  ProblemConfig problem;
  NoiseKind noise_kind = NoiseKind::kGaussian;
  double noise_sigma = 0.0;
  AlgoConfig algo;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::string output_dir = "zeloba-out";
  EmitFlags emit;
  std::optional<std::uint64_t> budget_cap;
  std::size_t threads = 0;  // 0: one per hardware thread
  std::size_t kkt_mc_samples = 10'000;

  /// Trial t runs with seed base_seed + t.
  std::uint64_t trial_seed(std::size_t t) const { return base_seed + t; }
};

struct PresetInfo {
  std::string name;
  std::string description;
};

inline std::vector<PresetInfo> preset_list() {
  return {
      {"unicycle-paper",
       "unicycle controller design: eta=0.001, L=40, n=7, K=500, adaptive radius, 20 trials; "
       "geometry, noise level and initial gain are library defaults (not published values)"},
      {"linear-ball", "min c.x on the unit ball, sigma=0.01, eta=0.05, K=2000, n=16, adaptive radius"},
      {"smooth-2con", "two-disc lens with both constraints active at the optimum, fixed radius"},
  };
}

/// JSON document a preset expands to.
inline json preset_json(const std::string& name) {
  if (name == "unicycle-paper") {
    return json{
        {"problem",
         {{"name", "unicycle"},
          {"lipschitz", 40.0},
          {"unicycle", {{"feedback", "error"}}}}},
        {"noise", {{"kind", "gaussian"}, {"sigma", 1e-3}}},
        {"algorithm",
         {{"eta", 1e-3},
          {"delta", 0.1},
          {"max_iters", 500},
          {"sample_policy", "fixed"},
          {"samples", 7},
          {"radius_policy", "adaptive"},
          {"margin_policy", "halt"}}},
        {"trials", 20},
    };
  }
  if (name == "linear-ball") {
    return json{
        {"problem", {{"name", "linear-ball"}, {"c", {1.0, 0.0}}}},
        {"noise", {{"kind", "gaussian"}, {"sigma", 0.01}}},
        {"algorithm",
         {{"eta", 0.05},
          {"delta", 0.1},
          {"max_iters", 2000},
          {"sample_policy", "fixed"},
          {"samples", 16},
          {"radius_policy", "adaptive"}}},
        {"trials", 10},
    };
  }
  if (name == "smooth-2con") {
    return json{
        {"problem", {{"name", "smooth-2con"}}},
        {"noise", {{"kind", "gaussian"}, {"sigma", 0.01}}},
        {"algorithm",
         {{"eta", 0.3},
          {"delta", 0.1},
          {"max_iters", 50},
          {"sample_policy", "theoretical"},
          {"sample_cap", 20000},
          {"clamp_to_cap", true},
          {"radius_policy", "fixed"}}},
        {"trials", 10},
    };
  }
  throw ConfigError("unknown preset '" + name + "'");
}

namespace detail {

inline void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + "." + key + ": unknown field");
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline double positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ConfigError(field + ": must be positive");
  return v;
}

template <int N>
Eigen::Matrix<double, N, 1> fixed_vector(const json& obj, const std::string& key,
                                         const std::string& where,
                                         const Eigen::Matrix<double, N, 1>& fallback) {
  const auto v = get<std::vector<double>>(obj, key, where, {});
  if (v.empty()) return fallback;
  if (v.size() != N) throw ConfigError(where + "." + key + ": expected " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

inline unicycle::Config parse_unicycle(const json& u, const std::string& where) {
  check_keys(u, where,
             {"horizon", "dt", "start", "goal", "obstacle_center", "obstacle_radius", "initial_gain",
              "feedback", "v_max", "omega_max"});
  unicycle::Config cfg;
  cfg.horizon = get<std::size_t>(u, "horizon", where, cfg.horizon);
  cfg.dt = positive(get<double>(u, "dt", where, cfg.dt), where + ".dt");
  cfg.start = fixed_vector<3>(u, "start", where, cfg.start);
  cfg.goal = fixed_vector<3>(u, "goal", where, cfg.goal);
  cfg.obstacle_center = fixed_vector<2>(u, "obstacle_center", where, cfg.obstacle_center);
  cfg.obstacle_radius =
      positive(get<double>(u, "obstacle_radius", where, cfg.obstacle_radius), where + ".obstacle_radius");
  cfg.v_max = positive(get<double>(u, "v_max", where, cfg.v_max), where + ".v_max");
  cfg.omega_max = positive(get<double>(u, "omega_max", where, cfg.omega_max), where + ".omega_max");
  if (u.contains("initial_gain")) {
    const auto rows = get<std::vector<std::vector<double>>>(u, "initial_gain", where, {});
    if (rows.size() != 2 || rows[0].size() != 3 || rows[1].size() != 3)
      throw ConfigError(where + ".initial_gain: expected a 2x3 matrix");
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) cfg.initial_gain(r, c) = rows[r][c];
  }
  const auto fb = get<std::string>(u, "feedback", where, "state");
  if (fb == "state") cfg.feedback = unicycle::Feedback::kState;
  else if (fb == "error") cfg.feedback = unicycle::Feedback::kError;
  else throw ConfigError(where + ".feedback: expected \"state\" or \"error\"");
  if (cfg.horizon == 0) throw ConfigError(where + ".horizon: must be positive");
  return cfg;
}

}  // namespace detail

/// Parses an already-merged configuration document.
inline ExperimentConfig parse_config(const json& doc) {
  using namespace detail;
  json merged = doc;
  ExperimentConfig cfg;
  if (doc.contains("preset")) {
    cfg.preset = get<std::string>(doc, "preset", "config", "");
    merged = preset_json(cfg.preset);
    merged.merge_patch(doc);
  }
  check_keys(merged, "config",
             {"preset", "problem", "noise", "algorithm", "trials", "base_seed", "output_dir", "emit",
              "budget_cap", "threads", "kkt_mc_samples"});

  const json problem = merged.value("problem", json::object());
  check_keys(problem, "problem", {"name", "lipschitz", "grad_lower", "c", "xbar", "a", "b", "unicycle"});
  auto& pc = cfg.problem;
  pc.name = get<std::string>(problem, "name", "problem", pc.name);
  if (problem.contains("lipschitz"))
    pc.lipschitz = positive(get<double>(problem, "lipschitz", "problem", 1.0), "problem.lipschitz");
  if (problem.contains("grad_lower"))
    pc.grad_lower = positive(get<double>(problem, "grad_lower", "problem", 1.0), "problem.grad_lower");
  pc.c = get<std::vector<double>>(problem, "c", "problem", {});
  pc.xbar = get<std::vector<double>>(problem, "xbar", "problem", {});
  pc.a = get<std::vector<double>>(problem, "a", "problem", {});
  if (problem.contains("b")) pc.b = get<double>(problem, "b", "problem", 0.0);
  if (problem.contains("unicycle")) pc.unicycle = parse_unicycle(problem.at("unicycle"), "problem.unicycle");
  if (pc.name != "unicycle") {
    const auto names = analytic_problem_names();
    if (std::find(names.begin(), names.end(), pc.name) == names.end())
      throw ConfigError("problem.name: unknown problem '" + pc.name + "'");
  }

  const json noise = merged.value("noise", json::object());
  check_keys(noise, "noise", {"kind", "sigma"});
  const auto kind = get<std::string>(noise, "kind", "noise", "gaussian");
  if (kind == "gaussian") cfg.noise_kind = NoiseKind::kGaussian;
  else if (kind == "bounded-uniform") cfg.noise_kind = NoiseKind::kBoundedUniform;
  else if (kind == "none") cfg.noise_kind = NoiseKind::kNone;
  else throw ConfigError("noise.kind: expected gaussian, bounded-uniform or none");
  cfg.noise_sigma = get<double>(noise, "sigma", "noise", 0.0);
  if (!(cfg.noise_sigma >= 0.0)) throw ConfigError("noise.sigma: must be nonnegative");
  if (cfg.noise_kind == NoiseKind::kNone) cfg.noise_sigma = 0.0;

  const json algo = merged.value("algorithm", json::object());
  check_keys(algo, "algorithm",
             {"eta", "delta", "max_iters", "sample_policy", "samples", "sample_cap", "clamp_to_cap",
              "radius_policy", "c_override", "margin_policy"});
  auto& ac = cfg.algo;
  ac.eta = get<double>(algo, "eta", "algorithm", ac.eta);
  ac.delta = get<double>(algo, "delta", "algorithm", ac.delta);
  ac.max_iters = get<std::size_t>(algo, "max_iters", "algorithm", ac.max_iters);
  const auto sp = get<std::string>(algo, "sample_policy", "algorithm", "fixed");
  if (sp == "fixed") ac.sample_policy = SamplePolicy::kFixed;
  else if (sp == "theoretical") ac.sample_policy = SamplePolicy::kTheoretical;
  else throw ConfigError("algorithm.sample_policy: expected \"fixed\" or \"theoretical\"");
  ac.samples = get<std::size_t>(algo, "samples", "algorithm", ac.samples);
  ac.sample_cap = get<std::size_t>(algo, "sample_cap", "algorithm", ac.sample_cap);
  ac.clamp_to_cap = get<bool>(algo, "clamp_to_cap", "algorithm", ac.clamp_to_cap);
  const auto rp = get<std::string>(algo, "radius_policy", "algorithm", "fixed");
  if (rp == "fixed") ac.radius_policy = RadiusPolicy::kFixed;
  else if (rp == "adaptive") ac.radius_policy = RadiusPolicy::kAdaptive;
  else throw ConfigError("algorithm.radius_policy: expected \"fixed\" or \"adaptive\"");
  if (algo.contains("c_override") && !algo.at("c_override").is_null())
    ac.c_override = get<double>(algo, "c_override", "algorithm", 0.0);
  const auto mp = get<std::string>(algo, "margin_policy", "algorithm", "halt");
  if (mp == "halt") ac.margin_policy = MarginPolicy::kHalt;
  else if (mp == "freeze") ac.margin_policy = MarginPolicy::kFreeze;
  else throw ConfigError("algorithm.margin_policy: expected \"halt\" or \"freeze\"");
  try {
    ac.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("algorithm: ") + e.what());
  }

  cfg.trials = get<std::size_t>(merged, "trials", "config", cfg.trials);
  if (cfg.trials == 0) throw ConfigError("config.trials: must be positive");
  cfg.base_seed = get<std::uint64_t>(merged, "base_seed", "config", cfg.base_seed);
  cfg.output_dir = get<std::string>(merged, "output_dir", "config", cfg.output_dir);
  if (merged.contains("budget_cap") && !merged.at("budget_cap").is_null())
    cfg.budget_cap = get<std::uint64_t>(merged, "budget_cap", "config", 0);
  cfg.threads = get<std::size_t>(merged, "threads", "config", cfg.threads);
  cfg.kkt_mc_samples = get<std::size_t>(merged, "kkt_mc_samples", "config", cfg.kkt_mc_samples);
  if (cfg.kkt_mc_samples == 0) throw ConfigError("config.kkt_mc_samples: must be positive");
  if (merged.contains("emit")) {
    const json& emit = merged.at("emit");
    check_keys(emit, "emit", {"trace_csv", "audit_csv", "summary_json"});
    cfg.emit.trace_csv = get<bool>(emit, "trace_csv", "emit", true);
    cfg.emit.audit_csv = get<bool>(emit, "audit_csv", "emit", true);
    cfg.emit.summary_json = get<bool>(emit, "summary_json", "emit", true);
  }
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Instantiates the configured problem, applying declared-constant overrides.
inline ProblemSpec build_problem(const ExperimentConfig& cfg) {
  const auto& pc = cfg.problem;
  ProblemSpec p;
  try {
    if (pc.name == "unicycle") {
      p = unicycle::make_problem(pc.unicycle, pc.lipschitz.value_or(40.0), pc.grad_lower.value_or(1.0),
                                 cfg.noise_sigma);
    } else if (pc.name == "linear-ball" && !pc.c.empty()) {
      p = linear_ball(to_vector(pc.c), cfg.noise_sigma);
    } else if (pc.name == "quadratic-halfspace" && (!pc.xbar.empty() || !pc.a.empty() || pc.b)) {
      if (pc.xbar.empty() || pc.a.empty() || !pc.b)
        throw ConfigError("problem: quadratic-halfspace needs xbar, a and b together");
      p = quadratic_halfspace(to_vector(pc.xbar), to_vector(pc.a), *pc.b, cfg.noise_sigma);
    } else {
      p = analytic_problem(pc.name, cfg.noise_sigma);
    }
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  if (pc.lipschitz) p.lipschitz = *pc.lipschitz;
  if (pc.grad_lower) p.grad_lower = *pc.grad_lower;
  try {
    p.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  return p;
}

}  // namespace zeloba::harness
