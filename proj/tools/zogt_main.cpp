#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "zogt/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitValidation = 4;

struct PlanOverrides {
  std::string plan_path;
  long seed = -1;
  std::string out;
  std::string topology;
  std::string mode;
};

zogt::ExperimentPlan resolve_plan(const PlanOverrides& o) {
  zogt::ExperimentPlan plan = zogt::load_plan(o.plan_path);
  if (o.seed >= 0) plan.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out.empty()) plan.out_dir = o.out;
  if (!o.topology.empty()) {
    plan.topologies.clear();
    std::stringstream ss(o.topology);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) plan.topologies.push_back(zogt::topology_from_string(tok));
  }
  if (!o.mode.empty()) {
    if (o.mode == "single_stage" || o.mode == "1s")
      plan.mode = zogt::Stage::single_stage;
    else if (o.mode == "two_stage" || o.mode == "2s")
      plan.mode = zogt::Stage::two_stage;
    else
      throw zogt::ConfigError("mode must be single_stage or two_stage");
  }
  zogt::validate_plan(plan);
  return plan;
}

void add_plan_options(CLI::App* cmd, PlanOverrides& o) {
  cmd->add_option("--plan", o.plan_path, "plan file (key = value lines)")
      ->required();
  cmd->add_option("--seed", o.seed, "master seed override");
  cmd->add_option("--out", o.out, "output directory override");
  cmd->add_option("--topology", o.topology, "comma-separated topology override");
  cmd->add_option("--mode", o.mode, "single_stage|two_stage override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed zeroth-order gradient-tracking simulator"};
  app.require_subcommand(1);

  PlanOverrides run_opts;
  auto* cmd_run = app.add_subcommand("run", "execute an experiment plan");
  add_plan_options(cmd_run, run_opts);

  PlanOverrides base_opts;
  auto* cmd_base =
      app.add_subcommand("baseline", "centralized counterpart of a plan");
  add_plan_options(cmd_base, base_opts);

  std::string lam_topology = "complete";
  int lam_m = 20;
  long lam_seed = 0;
  double lam_er_p = 0.2, lam_degree = 3.0;
  auto* cmd_lambda =
      app.add_subcommand("lambda", "print lambda_w for a topology");
  cmd_lambda->add_option("--topology", lam_topology)->required();
  cmd_lambda->add_option("--m", lam_m)->required();
  cmd_lambda->add_option("--seed", lam_seed);
  cmd_lambda->add_option("--er-p", lam_er_p);
  cmd_lambda->add_option("--sparse-degree", lam_degree);

  long val_seed = 7;
  auto* cmd_validate =
      app.add_subcommand("validate", "run the numerical invariant suite");
  cmd_validate->add_option("--seed", val_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const zogt::ExperimentPlan plan = resolve_plan(run_opts);
      const zogt::ExperimentResult result = zogt::run_experiment(plan);
      for (const auto& t : result.topologies) {
        std::printf("%s: lambda_w=%.6g, %zu path(s)\n",
                    zogt::topology_name(t.topology).c_str(), t.lambda_w,
                    t.runs.size());
      }
      std::printf("wrote %s\n", result.out_dir.c_str());
      return result.all_diverged ? kExitDiverged : kExitOk;
    }
    if (cmd_base->parsed()) {
      const zogt::ExperimentPlan plan = resolve_plan(base_opts);
      const zogt::RunOutcome out = zogt::centralized_baseline(plan);
      if (out.diverged) {
        std::printf("baseline diverged at iteration %ld\n", out.diverged_at);
        return kExitDiverged;
      }
      for (const auto& rec : out.trajectory.records)
        std::printf("k=%ld objective=%.17g\n", rec.k, rec.objective_estimate);
      return kExitOk;
    }
    if (cmd_lambda->parsed()) {
      zogt::TopologyParams tp;
      tp.rng_seed = static_cast<std::uint64_t>(lam_seed);
      tp.er_probability = lam_er_p;
      tp.sparse_degree = lam_degree;
      const zogt::Graph g = zogt::build_topology(
          zogt::topology_from_string(lam_topology), lam_m, tp);
      std::printf("%.12g\n", zogt::metropolis_weights(g).lambda_w);
      return kExitOk;
    }
    if (cmd_validate->parsed()) {
      const auto failures = zogt::validate_invariants(
          static_cast<std::uint64_t>(val_seed), true);
      if (!failures.empty()) {
        std::fprintf(stderr, "%zu invariant check(s) failed\n",
                     failures.size());
        return kExitValidation;
      }
      std::printf("all invariant checks passed\n");
      return kExitOk;
    }
  } catch (const zogt::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitOk;
}
