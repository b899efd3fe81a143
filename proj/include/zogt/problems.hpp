#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "zogt/lower_level.hpp"
#include "zogt/rng.hpp"

namespace zogt {

enum class Stage { single_stage, two_stage };

/// A pluggable SMPEC instance. All agents share the same functional form
/// and draw iid copies of the scenario vector xi; the layout of xi is
/// problem-specific (e.g. [upper_noise, lower_noise]).
struct ProblemSpec {
  std::string name;
  Stage stage = Stage::single_stage;
  int n = 1;  // upper decision dimension
  int p = 1;  // lower decision dimension

  /// Local upper objective h_tilde(x, z, xi).
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&,
                       const Eigen::VectorXd&)>
      h_tilde;
  /// Agent-indexed override of h_tilde for heterogeneous objectives; the
  /// built-in problems differ across agents only through their xi draws and
  /// leave this unset.
  std::function<double(int, const Eigen::VectorXd&, const Eigen::VectorXd&,
                       const Eigen::VectorXd&)>
      h_tilde_agent;
  /// Lower-level mapping F_tilde(x, z, xi) for one scenario draw.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      f_map;
  /// Euclidean projection onto Z(x).
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      project;
  /// Draws one scenario vector.
  std::function<Eigen::VectorXd(RngStream&)> sample_xi;

  /// Solution of the expectation-valued lower VI (single-stage); may be null.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> exact_z;
  /// Solution of the sample-fixed lower VI (two-stage); may be null.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      exact_z_scenario;

  double mu_f = 1.0;
  double l_f = 1.0;
  double nu_f = 0.0;
  double diameter_sq = 1.0;

  bool has_exact_z() const { return static_cast<bool>(exact_z); }
  bool has_exact_z_scenario() const {
    return static_cast<bool>(exact_z_scenario);
  }
};

/// Lower-level instance view of a problem (one agent's VI).
VIInstance make_vi(const ProblemSpec& problem);

/// Scalar toy MPEC: h(x,z) = (x+1-z)^2 with z(x) = argmin_{z>=0} |z-x|^2/2,
/// so the implicit objective is (x + 1 - max{0,x})^2. Noiseless.
ProblemSpec toy_mpec();

/// Bilevel benchmark on n=2, p=2 with a decision-dependent polyhedral
/// feasible set. Scenario layout: xi = [upper xi ~ U[5,8], lower zeta ~ U[3,6]].
ProblemSpec bilevel_benchmark(int num_agents);

struct CournotParams {
  double b = 0.1;
  double d = 0.2;          // leader cost curvature
  double x_u = 10.0;       // leader capacity (used only via leader_box)
  std::uint64_t cost_seed = 2024;
  Eigen::VectorXd costs;   // overrides the random draw when nonempty
};

/// Stackelberg leader against p Cournot followers on the nonnegative
/// orthant; each agent holds the full follower game with its own demand
/// draw a(xi) = xi ~ U[7.5,12.5]. Scenario layout: xi = [a].
ProblemSpec cournot_game(int num_followers, int num_agents,
                         bool include_leader_shift,
                         const CournotParams& params = {});

struct EvalOptions {
  long lower_iters = 150;
  long samples = 50;
  bool exact = false;        // use exact_z instead of the iterative solver
  SaSchedule sa{};           // single-stage inner schedule
  double det_gamma_hat = 0;  // two-stage inner stepsize; 0 -> mu/l^2
};

/// Monte Carlo estimate of the implicit objective
/// f(x) = E[h_tilde(x, z(x[,xi]), xi)]: per sample, draw xi, obtain the
/// lower solution (exactly or by lower_iters solver steps), evaluate h_tilde.
double estimate_implicit_objective(const ProblemSpec& problem,
                                   const Eigen::VectorXd& x_bar,
                                   const EvalOptions& opts, RngStream& rng);

}  // namespace zogt
