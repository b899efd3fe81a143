#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "zogt/rng.hpp"

namespace zogt {

/// One agent-local lower-level VI: find z* in Z(x) with
/// F(x,z*)^T (z - z*) >= 0 for all z in Z(x).
struct VIInstance {
  int dim_p = 1;
  /// Evaluates the (possibly sampled) mapping F_tilde(x_hat, z, noise).
  /// `noise` is empty for deterministic maps.
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x_hat,
                                const Eigen::VectorXd& z,
                                const Eigen::VectorXd& noise)>
      map_oracle;
  /// Euclidean projection onto Z(x_hat).
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x_hat,
                                const Eigen::VectorXd& point)>
      projector;
  /// Draws one lower-level noise realization (stochastic maps only).
  std::function<Eigen::VectorXd(RngStream&)> noise_sampler;

  double mu_f = 1.0;        // strong-monotonicity modulus
  double l_f = 1.0;         // Lipschitz constant of the mapping
  double nu_f = 0.0;        // noise second-moment bound
  double diameter_sq = 1.0; // D_i, sup of squared diameters of Z(x)
};

/// Diminishing-stepsize schedule for the stochastic approximation solver:
/// gamma_t = gamma_hat / (t + big_gamma_hat).
struct SaSchedule {
  double gamma_hat = 2.0;
  double big_gamma_hat = 4.0;
  double a = 1.0;  // exponent of the t_k growth rule
};

/// Throws unless gamma_hat > 1/mu and big_gamma_hat > gamma_hat l^2 / mu.
void validate_schedule(const SaSchedule& s, double mu_f, double l_f);

/// A schedule satisfying both constraints with a little slack.
SaSchedule default_schedule(double mu_f, double l_f, double a = 1.0);

struct LowerSolveResult {
  Eigen::VectorXd z;
  long iterations = 0;
  /// Theoretical inexactness bound implied by the schedule (for logging).
  double schedule_epsilon = 0.0;
};

/// Projected stochastic approximation: t_k steps of
/// z <- Proj_{Z(x_hat)}[z - gamma_t F_tilde(x_hat, z, xi_t)],
/// one noise draw per step.
LowerSolveResult sa_solve(const VIInstance& vi, const Eigen::VectorXd& x_hat,
                          const Eigen::VectorXd& z0, const SaSchedule& schedule,
                          long t_k, RngStream& noise_stream);

/// Projected deterministic iteration with constant stepsize
/// gamma_hat <= mu/l^2 on the sample-fixed map F_tilde(x_hat, ., xi).
LowerSolveResult det_solve(const VIInstance& vi, const Eigen::VectorXd& x_hat,
                           const Eigen::VectorXd& xi, const Eigen::VectorXd& z0,
                           double gamma_hat, long t_k);

/// ceil(sqrt(n) (k + big_gamma)^a / eta^{2/3}); at least 1.
long t_schedule_1s(long k, int n, double eta, double a, double big_gamma);

/// ceil(-a/ln(1 - mu gamma_hat) * ln(n^{1/2a} (k+1) eta^{-2/(3a)}));
/// returns 1 when the inner logarithm is nonpositive.
long t_schedule_2s(long k, int n, double eta, double a, double mu_f,
                   double gamma_hat);

/// Simplified growth rule with the rate constant folded in:
/// ceil(ln(sqrt(n) (k+1) eta^{-2/3})), at least 1.
long t_schedule_2s_experiment(long k, int n, double eta);

/// {z : A z >= b, and z >= 0 if nonneg}. Small-scale only (p <= 4, q <= 6).
struct Polyhedron {
  Eigen::MatrixXd a;  // q x p
  Eigen::VectorXd b;  // q
  bool nonneg = true;
};

struct ProjectionResult {
  Eigen::VectorXd z;
  std::vector<int> active;       // row indices (A rows first, then z_j >= 0)
  Eigen::VectorXd multipliers;   // one per active row, >= 0
};

/// Exact Euclidean projection by active-set enumeration over subsets of at
/// most p constraint rows. Throws if no feasible candidate exists.
ProjectionResult project_polyhedron(const Eigen::VectorXd& point,
                                    const Polyhedron& constraints);

/// Random feasible start per the algorithm inputs: a standard-normal draw
/// pushed through the instance projector.
Eigen::VectorXd random_feasible_start(const VIInstance& vi,
                                      const Eigen::VectorXd& x_hat,
                                      RngStream& rng);

}  // namespace zogt
