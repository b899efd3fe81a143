#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "zogt/network.hpp"
#include "zogt/problems.hpp"

namespace zogt {

enum class OracleMode { exact, inexact };
enum class ScheduleVariant { theorem, experiment };

struct ScheduleConfig {
  SaSchedule sa{};                // single-stage inner solver
  double det_gamma_hat = 0.0;     // two-stage inner stepsize; 0 -> mu/l^2
  ScheduleVariant variant = ScheduleVariant::theorem;
  long t_floor = 0;               // lower bound on inner iterations
};

struct RunConfig {
  Stage mode = Stage::single_stage;
  OracleMode oracle = OracleMode::inexact;
  double gamma = 1e-4;
  double eta = 0.1;
  long horizon_k = 100;
  int minibatch = 1;
  ScheduleConfig schedule{};

  bool common_init = true;
  Eigen::VectorXd x0;             // common start; empty -> origin
  double init_scale = 1.0;        // stddev of per-agent random init
  std::optional<std::pair<double, double>> leader_box;  // two-stage clip
  std::uint64_t master_seed = 0;

  bool check_identities = true;   // runtime averaging-identity assertions
  bool warm_start = false;        // reuse previous lower solutions as z0
};

void validate_config(const RunConfig& cfg);

struct AgentState {
  Eigen::VectorXd x;       // local decision copy
  Eigen::VectorXd y;       // gradient tracker
  Eigen::VectorXd g_prev;  // previous zeroth-order gradient
};

struct SwarmState {
  std::vector<AgentState> agents;
  long iteration = 0;
  // Warm-start caches, one lower solution per agent and perturbation side.
  std::vector<Eigen::VectorXd> warm_minus, warm_plus;

  int num_agents() const { return static_cast<int>(agents.size()); }
  Eigen::MatrixXd x_matrix() const;
  Eigen::MatrixXd y_matrix() const;
  Eigen::VectorXd x_mean() const;
};

struct CheckpointRecord {
  long k = 0;
  double consensus_error = 0.0;   // ||x - 1 xbar||_F^2
  double tracker_norm = 0.0;      // ||ybar||
  double objective_estimate = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_estimate = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
  std::vector<CheckpointRecord> records;
  SwarmState final_state;
  std::uint64_t seed = 0;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long k, std::string what)
      : std::runtime_error(std::move(what)), iteration(k) {}
  long iteration;
  Trajectory partial;  // filled by run()
};

SwarmState init_swarm(const ProblemSpec& problem, const MixingMatrix& w,
                      const RunConfig& cfg);

/// Minibatch-averaged two-point gradient of one agent at the current
/// iteration. Depends only on (cfg.master_seed, agent, state.iteration), so
/// the assembly order across agents is immaterial.
Eigen::VectorXd agent_gradient(const SwarmState& state,
                               const ProblemSpec& problem,
                               const RunConfig& cfg, const VIInstance& vi,
                               int agent);

/// One iteration of the single-stage scheme: per-agent sphere and scenario
/// draws, two lower-level evaluations, minibatch-averaged two-point gradient,
/// then the stacked tracking and consensus updates
///   y_{k+1} = W (y_k + g_k - g_{k-1}),   x_{k+1} = W (x_k - gamma y_{k+1}).
SwarmState step_single_stage(const SwarmState& state, const MixingMatrix& w,
                             const ProblemSpec& problem, const RunConfig& cfg);

/// Two-stage variant: one scenario draw per agent per minibatch element is
/// shared by both perturbed lower solves and both objective evaluations.
SwarmState step_two_stage(const SwarmState& state, const MixingMatrix& w,
                          const ProblemSpec& problem, const RunConfig& cfg);

struct MetricHooks {
  std::vector<long> checkpoints;  // sorted iteration indices; empty -> {0, K}
  std::function<void(long k, const SwarmState&, CheckpointRecord&)>
      on_checkpoint;              // may be null
};

/// Runs horizon_k iterations of the configured mode. Fully deterministic
/// given cfg.master_seed; agent processing order does not matter.
Trajectory run(const RunConfig& cfg, const ProblemSpec& problem,
               const MixingMatrix& w, const MetricHooks& hooks = {});

/// Theorem stepsize: min of the 1/sqrt(K) formula and the five-branch
/// spectral cap, both scaled by eta/(sqrt(n) L0).
double theoretical_stepsize(double lambda_w, int n, double eta, double l0,
                            long k_horizon);

}  // namespace zogt
