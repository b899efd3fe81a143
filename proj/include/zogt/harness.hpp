#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zogt/gt_core.hpp"
#include "zogt/network.hpp"
#include "zogt/problems.hpp"

namespace zogt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalProtocol {
  int epochs = 5;
  long lower_iters = 150;
  int eval_samples = 50;  // per agent
};

struct ExperimentPlan {
  std::string problem = "bilevel";  // toy | bilevel | cournot
  Stage mode = Stage::single_stage;
  OracleMode oracle = OracleMode::inexact;
  int m = 20;
  std::vector<Topology> topologies{Topology::complete, Topology::ring,
                                   Topology::sparse, Topology::tree,
                                   Topology::erdos_renyi};
  double gamma = 1e-4;
  double eta = 0.1;
  long horizon_k = 100;
  int minibatch = 5;
  int sample_paths = 5;
  EvalProtocol eval{};
  // gamma_hat <= 0 means "derive a valid schedule from the problem constants".
  SaSchedule sa{0.0, 0.0, 1.0};
  ScheduleVariant variant = ScheduleVariant::experiment;
  std::optional<std::pair<double, double>> leader_box;
  bool include_leader_shift = true;
  double d = 0.2;
  double x_u = 10.0;
  int p_followers = 20;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

void validate_plan(const ExperimentPlan& plan);

/// Parses a flat key=value plan file; '#' starts a comment. Unknown keys and
/// missing required keys raise ConfigError naming them.
ExperimentPlan load_plan(const std::string& path);
ExperimentPlan parse_plan(const std::map<std::string, std::string>& kv);

ProblemSpec instantiate_problem(const ExperimentPlan& plan);
/// Plan schedule with unset entries filled in from the problem constants.
SaSchedule resolve_schedule(const ExperimentPlan& plan,
                            const ProblemSpec& problem);
RunConfig run_config_from_plan(const ExperimentPlan& plan);
std::vector<long> plan_checkpoints(const ExperimentPlan& plan);

/// ||x - 1 xbar||_F^2.
double consensus_error(const Eigen::MatrixXd& x);

struct RunOutcome {
  int run_index = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  long diverged_at = -1;
  Trajectory trajectory;  // partial when diverged
};

struct TopologyResult {
  Topology topology;
  double lambda_w = 0.0;
  std::vector<RunOutcome> runs;
};

struct ExperimentResult {
  std::vector<TopologyResult> topologies;
  std::vector<RunOutcome> baseline;  // centralized counterpart, same budget
  std::string out_dir;
  bool all_diverged = false;
};

/// Runs every topology x sample path (plus the centralized baseline), writes
/// one CSV per (topology, metric) with rows `k,metric_value,run_index`, mean
/// files `k,mean,stderr`, and a JSON manifest. Divergent paths are recorded
/// and skipped in the means; the remaining runs continue.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// The m = 1 reduction with W = [1] and the same total sample budget
/// (minibatch m*B): the centralized zeroth-order scheme.
RunOutcome centralized_baseline(const ExperimentPlan& plan);

/// Built-in invariant suite (used by the `validate` CLI verb). Returns the
/// failure messages, empty when everything passes; prints one line per check
/// to the stream when verbose.
std::vector<std::string> validate_invariants(std::uint64_t seed, bool verbose);

}  // namespace zogt
