#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cocarry/pipeline.hpp"

namespace {

struct CliOptions {
  std::string config;
  std::string out;
  std::string batch;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool verbose = false;
};

cocarry::Scenario make_scenario(const CliOptions& opt) {
  cocarry::Scenario s = cocarry::load_scenario(opt.config);
  if (!opt.out.empty()) s.out_dir = opt.out;
  if (opt.seed_set) s.posture.opts.seed = opt.seed;
  return s;
}

void print_posture(const cocarry::PostureSolution& sol) {
  std::printf("improved: %s\n", sol.improved ? "yes" : "no");
  std::printf("cost: %.9g -> %.9g\n", sol.cost_init, sol.cost_opt);
  std::printf("ergonomic score: %.6g -> %.6g\n", sol.score_init, sol.score_opt);
  std::printf("constraint residual: %.3g\n", sol.constraint_residual);
}

void print_simulation(const cocarry::SimulationResult& sim) {
  std::printf("steps: %zu\n", sim.rows.size());
  std::printf("terminal error: %.6g m\n", sim.terminal_error);
  std::printf("fallback steps: %d\n", sim.fallback_steps);
  std::printf("max state violation: %.3g\n", sim.max_state_violation);
  if (sim.diverged) std::printf("warning: simulation diverged\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bimanual co-carrying toolkit: posture optimization, pose "
               "generation, min-jerk planning, and predictive impedance control"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CliOptions opt;
  app.add_option("--config", opt.config, "Scenario config file (TOML-style)");
  app.add_option("--out", opt.out, "Output directory (overrides the config)");
  app.add_option("--seed", opt.seed, "Optimizer RNG seed")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  app.add_flag("--verbose", opt.verbose, "Print stage progress to stderr");

  auto* cmd_ik = app.add_subcommand("ik", "Recover joint angles from skeleton frames");
  auto* cmd_opt = app.add_subcommand("optimize", "Optimize the bimanual posture");
  auto* cmd_pose = app.add_subcommand("posegen", "Generate matching robot target poses");
  auto* cmd_plan = app.add_subcommand("plan", "Plan minimum-jerk trajectories");
  auto* cmd_sim = app.add_subcommand("simulate", "Run the closed-loop controller");
  auto* cmd_run = app.add_subcommand("run", "Run the full pipeline");
  cmd_run->add_option("--batch", opt.batch,
                      "Run every *.toml scenario in a directory concurrently");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed() && !opt.batch.empty()) {
      const auto errors = cocarry::run_batch(opt.batch, opt.verbose);
      for (const auto& e : errors) std::fprintf(stderr, "error: %s\n", e.c_str());
      return errors.empty() ? 0 : 1;
    }
    if (opt.config.empty()) {
      std::fprintf(stderr, "error: --config is required\n");
      return 2;
    }

    cocarry::Scenario scenario;
    try {
      scenario = make_scenario(opt);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    }

    if (cmd_ik->parsed()) {
      const auto r = cocarry::run_stage_ik(scenario);
      std::printf("residuals: left %.3g m, right %.3g m\n", r.residual_left,
                  r.residual_right);
    } else if (cmd_opt->parsed()) {
      print_posture(cocarry::run_stage_optimize(scenario));
    } else if (cmd_pose->parsed()) {
      const auto t = cocarry::run_stage_posegen(scenario);
      std::printf("ee_left target: %.6g %.6g %.6g\n", t.ee_left.position.x(),
                  t.ee_left.position.y(), t.ee_left.position.z());
      std::printf("ee_right target: %.6g %.6g %.6g\n", t.ee_right.position.x(),
                  t.ee_right.position.y(), t.ee_right.position.z());
      if (t.antiparallel) std::printf("note: antiparallel wrist vectors\n");
    } else if (cmd_plan->parsed()) {
      const auto p = cocarry::run_stage_plan(scenario);
      std::printf("duration: %.6g s, %zu samples per arm\n", p.duration, p.left.size());
    } else if (cmd_sim->parsed()) {
      print_simulation(cocarry::run_stage_simulate(scenario));
    } else if (cmd_run->parsed()) {
      const auto report = cocarry::run_pipeline(scenario, opt.verbose);
      std::printf("%s", report.serialize().c_str());
    }
    return 0;
  } catch (const cocarry::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
