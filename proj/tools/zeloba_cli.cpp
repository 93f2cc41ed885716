// Command-line front end: run experiments, verify statistical properties, list
// presets and print sample/iteration planning estimates.
//
// Exit codes: 0 success, 1 usage or config error, 2 run failure, 3 property failure.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "zeloba/harness/config.hpp"
#include "zeloba/harness/experiment.hpp"
#include "zeloba/harness/verify.hpp"
#include "zeloba/solver.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRunFailure = 2;
constexpr int kPropertyFailure = 3;

int cmd_run(const std::string& config_path, const std::string& output_dir) {
  using namespace zeloba::harness;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    build_problem(cfg);
  } catch (const zeloba::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  }
  RunSummary summary;
  try {
    summary = run_experiment(cfg);
  } catch (const zeloba::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kRunFailure;
  }
  for (const auto& t : summary.trials) {
    for (const auto& w : t.warnings) std::cerr << "warning (trial " << t.trial << "): " << w << "\n";
    std::printf("trial %zu seed %llu %s: f0 %.6g -> %.6g, max constraint %.4g, violations %llu, directions %llu\n",
                t.trial, static_cast<unsigned long long>(t.seed), t.status.c_str(), t.initial_objective,
                t.final_objective, t.final_max_constraint, static_cast<unsigned long long>(t.violation_count),
                static_cast<unsigned long long>(t.total_directions));
  }
  std::printf("objective median %.6g [min %.6g, max %.6g], total violations %llu\n",
              summary.aggregate.median_objective, summary.aggregate.min_objective,
              summary.aggregate.max_objective, static_cast<unsigned long long>(summary.aggregate.total_violations));
  std::printf("output: %s\n", resolve_output_dir(cfg).string().c_str());
  for (const auto& t : summary.trials)
    if (t.status != "completed") return kRunFailure;
  return 0;
}

int cmd_verify(const std::string& suite, const zeloba::harness::VerifyOptions& opt) {
  using namespace zeloba::harness;
  std::vector<VerifyReport> reports;
  try {
    reports = verify_properties(suite, opt);
  } catch (const zeloba::LookupError& e) {
    std::cerr << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "verification failed to run: " << e.what() << "\n";
    return kRunFailure;
  }
  bool ok = true;
  for (const auto& rep : reports) {
    std::printf("[%s]\n", rep.suite.c_str());
    for (const auto& r : rep.results) {
      std::printf("  %s  %s: %.6g %s %.6g\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.statistic,
                  r.relation.c_str(), r.threshold);
    }
    ok = ok && rep.passed();
  }
  return ok ? 0 : kPropertyFailure;
}

int cmd_presets() {
  for (const auto& p : zeloba::harness::preset_list())
    std::printf("%-16s %s\n", p.name.c_str(), p.description.c_str());
  return 0;
}

int cmd_plan(const std::string& config_path, double barrier_gap) {
  using namespace zeloba::harness;
  try {
    const auto cfg = load_config(config_path);
    const auto problem = build_problem(cfg);
    const auto p = zeloba::plan(problem, cfg.algo, barrier_gap);
    std::printf("problem %s, d = %zu, m = %zu, L = %g, l = %g, sigma = %g\n", problem.name.c_str(), problem.dim,
                problem.num_constraints, problem.lipschitz, problem.grad_lower, problem.noise_sigma);
    std::printf("C = %.6g, nu = C*eta/L = %.6g, Sigma = %.6g\n", p.c, p.nu, p.big_sigma);
    std::printf("samples per iteration for safety:      %.6g\n", p.safety_samples);
    std::printf("samples per iteration for convergence: %.6g\n", p.convergence_samples);
    std::printf("iterations (barrier gap %g): max{%.6g, %.6g, %.6g} = %.6g\n", barrier_gap, p.k_descent,
                p.k_smoothness, p.k_log, p.k_required());
    std::printf("configured: K = %zu\n", cfg.algo.max_iters);
  } catch (const zeloba::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "plan failed: " << e.what() << "\n";
    return kRunFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe zeroth-order log-barrier optimization"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto* run = app.add_subcommand("run", "Run the trials described by a config file");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("-o,--output-dir", output_dir, "Override the output directory");

  std::string suite;
  zeloba::harness::VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "Run a statistical property suite");
  verify->add_option("suite", suite, "smoothing | coverage | estimator-unbiasedness | output-law | "
                                     "safety-containment | all")
      ->required();
  verify->add_option("--seed", vopt.seed, "Master seed");
  verify->add_option("--mc-samples", vopt.mc_samples, "Monte-Carlo samples per smoothing estimate");
  verify->add_option("--points", vopt.points, "Random points per smoothing property");

  app.add_subcommand("presets", "List built-in presets");

  double barrier_gap = 1.0;
  auto* plan = app.add_subcommand("plan", "Print sample-count and iteration-count estimates for a config");
  plan->add_option("config", config_path, "JSON config file")->required();
  plan->add_option("--barrier-gap", barrier_gap, "Estimate of B(x0) - B(x*)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (*run) return cmd_run(config_path, output_dir);
  if (*verify) return cmd_verify(suite, vopt);
  if (app.got_subcommand("presets")) return cmd_presets();
  if (*plan) return cmd_plan(config_path, barrier_gap);
  return kUsageError;
}
