#include "zogt/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace zogt {

VIInstance make_vi(const ProblemSpec& problem) {
  VIInstance vi;
  vi.dim_p = problem.p;
  vi.map_oracle = problem.f_map;
  vi.projector = problem.project;
  vi.noise_sampler = problem.sample_xi;
  vi.mu_f = problem.mu_f;
  vi.l_f = problem.l_f;
  vi.nu_f = problem.nu_f;
  vi.diameter_sq = problem.diameter_sq;
  return vi;
}

ProblemSpec toy_mpec() {
  ProblemSpec prob;
  prob.name = "toy";
  prob.stage = Stage::single_stage;
  prob.n = 1;
  prob.p = 1;
  prob.h_tilde = [](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                    const Eigen::VectorXd&) {
    const double r = x[0] + 1.0 - z[0];
    return r * r;
  };
  prob.f_map = [](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                  const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, z[0] - x[0]).eval();
  };
  prob.project = [](const Eigen::VectorXd&, const Eigen::VectorXd& point) {
    return Eigen::VectorXd::Constant(1, std::max(0.0, point[0])).eval();
  };
  prob.sample_xi = [](RngStream&) { return Eigen::VectorXd(); };
  prob.exact_z = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, std::max(0.0, x[0])).eval();
  };
  prob.exact_z_scenario = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, std::max(0.0, x[0])).eval();
  };
  prob.mu_f = 1.0;
  prob.l_f = 1.0;
  prob.nu_f = 0.0;
  prob.diameter_sq = 100.0;  // nominal; the orthant is unbounded
  return prob;
}

namespace {

// Feasible set of the bilevel benchmark: y >= 0 plus two rows whose
// right-hand sides depend on the upper decision.
Polyhedron bilevel_feasible_set(const Eigen::VectorXd& x) {
  Polyhedron poly;
  poly.a.resize(2, 2);
  poly.a << -2.0, 1.0, 3.0, -1.0;
  poly.b.resize(2);
  poly.b[0] = -3.0 - x[0] * x[0] + 2.0 * x[0] - x[1] * x[1];
  poly.b[1] = 4.0 - x[1];
  poly.nonneg = true;
  return poly;
}

constexpr double kZetaLo = 3.0, kZetaHi = 6.0;
constexpr double kXiLo = 5.0, kXiHi = 8.0;

}  // namespace

ProblemSpec bilevel_benchmark(int num_agents) {
  if (num_agents < 1)
    throw std::invalid_argument("bilevel_benchmark: need at least one agent");
  ProblemSpec prob;
  prob.name = "bilevel";
  prob.stage = Stage::single_stage;
  prob.n = 2;
  prob.p = 2;
  // Scenario vector: xi[0] drives the upper objective, xi[1] the lower map.
  prob.h_tilde = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& xi) {
    return -x[0] * x[0] - 3.0 * x[1] - xi[0] * y[0] + y[1] * y[1];
  };
  prob.f_map = [](const Eigen::VectorXd&, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& xi) {
    Eigen::VectorXd out(2);
    out[0] = 2.0 * y[0];
    out[1] = 2.0 * y[1] - xi[1];
    return out;
  };
  prob.project = [](const Eigen::VectorXd& x, const Eigen::VectorXd& point) {
    return project_polyhedron(point, bilevel_feasible_set(x)).z;
  };
  prob.sample_xi = [](RngStream& rng) {
    Eigen::VectorXd xi(2);
    xi[0] = rng.uniform(kXiLo, kXiHi);
    xi[1] = rng.uniform(kZetaLo, kZetaHi);
    return xi;
  };
  // The expectation map is the gradient of y1^2 + (y2 - E[zeta]/2)^2 up to a
  // constant, so the VI solution is the projection of (0, E[zeta]/2).
  const double zeta_mean = 0.5 * (kZetaLo + kZetaHi);
  prob.exact_z = [zeta_mean](const Eigen::VectorXd& x) {
    Eigen::VectorXd target(2);
    target << 0.0, 0.5 * zeta_mean;
    return project_polyhedron(target, bilevel_feasible_set(x)).z;
  };
  prob.exact_z_scenario = [](const Eigen::VectorXd& x,
                             const Eigen::VectorXd& xi) {
    Eigen::VectorXd target(2);
    target << 0.0, 0.5 * xi[1];
    return project_polyhedron(target, bilevel_feasible_set(x)).z;
  };
  prob.mu_f = 2.0;
  prob.l_f = 2.0;
  prob.nu_f = std::sqrt((kZetaHi - kZetaLo) * (kZetaHi - kZetaLo) / 12.0);
  prob.diameter_sq = 100.0;  // nominal; the set is unbounded
  return prob;
}

ProblemSpec cournot_game(int num_followers, int num_agents,
                         bool include_leader_shift,
                         const CournotParams& params) {
  if (num_followers < 1)
    throw std::invalid_argument("cournot_game: need at least one follower");
  if (num_agents < 1)
    throw std::invalid_argument("cournot_game: need at least one agent");
  const int p = num_followers;
  const double b = params.b;

  Eigen::VectorXd c = params.costs;
  if (c.size() == 0) {
    RngStream rng = make_stream(params.cost_seed, StreamPurpose::problem_const);
    c.resize(p);
    for (int j = 0; j < p; ++j) c[j] = rng.uniform(0.05, 0.5);
  } else if (c.size() != p) {
    throw std::invalid_argument("cournot_game: costs size != num_followers");
  }

  ProblemSpec prob;
  prob.name = "cournot";
  prob.stage = Stage::two_stage;
  prob.n = 1;
  prob.p = p;
  const double d = params.d;
  prob.h_tilde = [b, d](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& xi) {
    const double total = x[0] + z.sum();
    return 0.5 * d * x[0] * x[0] - x[0] * (xi[0] - b * total);
  };
  prob.f_map = [b, c, include_leader_shift](const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& z,
                                            const Eigen::VectorXd& xi) {
    const double coupling = b * z.sum() - xi[0] +
                            (include_leader_shift ? b * x[0] : 0.0);
    return ((c.array() + b) * z.array() + coupling).matrix().eval();
  };
  prob.project = [](const Eigen::VectorXd&, const Eigen::VectorXd& point) {
    return point.cwiseMax(0.0).eval();
  };
  prob.sample_xi = [](RngStream& rng) {
    return Eigen::VectorXd::Constant(1, rng.uniform(7.5, 12.5)).eval();
  };

  prob.mu_f = c.minCoeff() + b;
  prob.l_f = c.maxCoeff() + b + b * p;
  prob.nu_f = 0.0;
  {
    const double z_cap = 12.5 / (c.minCoeff() + b);
    prob.diameter_sq = 4.0 * p * z_cap * z_cap;  // nominal logging bound
  }

  // Interior solve of (diag(c) + bI + b 11^T) z = rhs * 1 by
  // Sherman-Morrison; falls back to the projection method when the interior
  // solution leaves the orthant.
  const Eigen::VectorXd dinv_ones = (c.array() + b).inverse().matrix();
  const double dinv_sum = dinv_ones.sum();
  const double mu = prob.mu_f, lf = prob.l_f;
  auto f_map_copy = prob.f_map;
  auto project_copy = prob.project;
  prob.exact_z_scenario = [=](const Eigen::VectorXd& x,
                              const Eigen::VectorXd& xi) -> Eigen::VectorXd {
    const double rhs = xi[0] - (include_leader_shift ? b * x[0] : 0.0);
    Eigen::VectorXd z = (rhs / (1.0 + b * dinv_sum)) * dinv_ones;
    if ((z.array() >= 0.0).all()) return z;
    VIInstance vi;
    vi.dim_p = p;
    vi.map_oracle = f_map_copy;
    vi.projector = project_copy;
    vi.mu_f = mu;
    vi.l_f = lf;
    vi.diameter_sq = 1.0;
    return det_solve(vi, x, xi, Eigen::VectorXd::Zero(p), mu / (lf * lf), 10000)
        .z;
  };
  return prob;
}

double estimate_implicit_objective(const ProblemSpec& problem,
                                   const Eigen::VectorXd& x_bar,
                                   const EvalOptions& opts, RngStream& rng) {
  if (opts.lower_iters < 1)
    throw std::invalid_argument(
        "estimate_implicit_objective: lower_iters must be >= 1");
  if (opts.samples < 1)
    throw std::invalid_argument(
        "estimate_implicit_objective: samples must be >= 1");

  const VIInstance vi = make_vi(problem);
  SaSchedule sa = opts.sa;
  if (problem.stage == Stage::single_stage && !opts.exact) {
    if (sa.gamma_hat * problem.mu_f <= 1.0)
      sa = default_schedule(problem.mu_f, problem.l_f);
  }
  const double det_gamma = opts.det_gamma_hat > 0
                               ? opts.det_gamma_hat
                               : problem.mu_f / (problem.l_f * problem.l_f);

  double sum = 0.0;
  for (long s = 0; s < opts.samples; ++s) {
    const Eigen::VectorXd xi = problem.sample_xi(rng);
    Eigen::VectorXd z;
    if (problem.stage == Stage::single_stage) {
      if (opts.exact) {
        if (!problem.has_exact_z())
          throw std::invalid_argument(
              "estimate_implicit_objective: problem has no exact oracle");
        z = problem.exact_z(x_bar);
      } else {
        const Eigen::VectorXd z0 = random_feasible_start(vi, x_bar, rng);
        z = sa_solve(vi, x_bar, z0, sa, opts.lower_iters, rng).z;
      }
    } else {
      if (opts.exact) {
        if (!problem.has_exact_z_scenario())
          throw std::invalid_argument(
              "estimate_implicit_objective: problem has no exact oracle");
        z = problem.exact_z_scenario(x_bar, xi);
      } else {
        const Eigen::VectorXd z0 = random_feasible_start(vi, x_bar, rng);
        z = det_solve(vi, x_bar, xi, z0, det_gamma, opts.lower_iters).z;
      }
    }
    sum += problem.h_tilde(x_bar, z, xi);
  }
  return sum / static_cast<double>(opts.samples);
}

}  // namespace zogt
