#include <cmath>
#include <iostream>
#include <sstream>

#include "zogt/harness.hpp"
#include "zogt/smoothing.hpp"

#include <Eigen/SVD>

namespace zogt {

namespace {

struct Checker {
  std::vector<std::string> failures;
  bool verbose;

  void check(bool ok, const std::string& what) {
    if (verbose)
      std::cout << (ok ? "[pass] " : "[FAIL] ") << what << "\n";
    if (!ok) failures.push_back(what);
  }
};

double svd_largest(const Eigen::MatrixXd& a) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

}  // namespace

std::vector<std::string> validate_invariants(std::uint64_t seed, bool verbose) {
  Checker c{{}, verbose};

  // Mixing matrices across all five families at m = 20.
  const Topology topos[] = {Topology::complete, Topology::ring,
                            Topology::sparse, Topology::tree,
                            Topology::erdos_renyi};
  for (const Topology t : topos) {
    TopologyParams tp;
    tp.rng_seed = seed;
    const Graph g = build_topology(t, 20, tp);
    const MixingMatrix w = metropolis_weights(g);
    const int m = g.m;
    const auto ones = Eigen::VectorXd::Ones(m);
    const std::string name = topology_name(t);
    c.check((w.w * ones - ones).cwiseAbs().maxCoeff() <= 1e-12,
            name + ": row sums are 1");
    c.check((w.w.transpose() * ones - ones).cwiseAbs().maxCoeff() <= 1e-12,
            name + ": column sums are 1");
    c.check(w.w.minCoeff() >= 0.0, name + ": nonnegative entries");
    c.check(w.w.diagonal().maxCoeff() > 0.0, name + ": positive diagonal");
    bool pattern_ok = true;
    for (int i = 0; i < m && pattern_ok; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j && w.w(i, j) != 0.0 && !g.has_edge(i, j)) {
          pattern_ok = false;
          break;
        }
    c.check(pattern_ok, name + ": weights only on edges");
    c.check(w.lambda_w >= 0.0 && w.lambda_w < 1.0, name + ": lambda_w in [0,1)");
    const double ref = svd_largest(
        w.w - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m)));
    c.check(std::abs(w.lambda_w - ref) <= 1e-8,
            name + ": lambda_w matches the SVD oracle");
    if (t == Topology::complete)
      c.check(w.lambda_w <= 1e-10, "complete: lambda_w vanishes");

    // Mean preservation and spectral-gap contraction on random x.
    RngStream rng(seed, 0x11);
    Eigen::MatrixXd x(m, 3);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
    const Eigen::MatrixXd wx = mix(w, x);
    c.check((wx.colwise().sum() - x.colwise().sum()).cwiseAbs().maxCoeff() <=
                1e-10,
            name + ": mix preserves column sums");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double lhs = (wx.rowwise() - mean).norm();
    const double rhs = w.lambda_w * (x.rowwise() - mean).norm() + 1e-9;
    c.check(lhs <= rhs, name + ": consensus contraction");
  }

  // Exact projection sanity.
  {
    Polyhedron orthant;
    orthant.a.resize(0, 2);
    orthant.b.resize(0);
    orthant.nonneg = true;
    Eigen::Vector2d pt(-1.0, -1.0);
    const auto proj = project_polyhedron(pt, orthant);
    c.check(proj.z.isZero(1e-14), "projection: orthant corner");

    Polyhedron facet;
    facet.a.resize(1, 2);
    facet.a << 1.0, 1.0;
    facet.b.resize(1);
    facet.b << 3.0;
    facet.nonneg = true;
    const auto p2 = project_polyhedron(Eigen::Vector2d(2.0, 0.0), facet);
    c.check((p2.z - Eigen::Vector2d(2.5, 0.5)).norm() <= 1e-12,
            "projection: single facet");

    RngStream rng(seed, 0x12);
    bool idem = true, nonexp = true;
    for (int trial = 0; trial < 50; ++trial) {
      Polyhedron poly;
      poly.a.resize(2, 2);
      Eigen::Vector2d feas(rng.uniform(0, 2), rng.uniform(0, 2));
      for (int r = 0; r < 2; ++r) {
        poly.a(r, 0) = rng.normal();
        poly.a(r, 1) = rng.normal();
      }
      poly.b = poly.a * feas - Eigen::Vector2d(std::abs(rng.normal()),
                                               std::abs(rng.normal()));
      poly.nonneg = true;
      Eigen::Vector2d u(rng.normal() * 3, rng.normal() * 3);
      Eigen::Vector2d v(rng.normal() * 3, rng.normal() * 3);
      const Eigen::VectorXd pu = project_polyhedron(u, poly).z;
      const Eigen::VectorXd pv = project_polyhedron(v, poly).z;
      if ((project_polyhedron(pu, poly).z - pu).norm() > 1e-12) idem = false;
      if ((pu - pv).norm() > (u - v).norm() + 1e-12) nonexp = false;
    }
    c.check(idem, "projection: idempotence");
    c.check(nonexp, "projection: nonexpansivity");
  }

  // Two-point estimator arithmetic.
  {
    SphereDirection v{Eigen::Vector2d(1.0, 0.0)};
    const auto g = zo_gradient(2.0, 1.0, v, 0.5, 2);
    c.check((g.g - Eigen::Vector2d(2.0, 0.0)).norm() <= 1e-15,
            "zo_gradient: arithmetic example");
  }

  // Growth-rule values.
  c.check(t_schedule_1s(9, 4, 0.1, 1.0, 1.0) == 93, "t_schedule_1s: value 93");
  c.check(t_schedule_1s(0, 2, 0.1, 1.0, 1.0) == 7, "t_schedule_1s: value 7");
  c.check(t_schedule_2s(0, 1, 0.1, 1.0, 1.0, 0.5) == 3, "t_schedule_2s: value 3");
  c.check(t_schedule_2s(0, 1, 1.0, 1.0, 1.0, 0.5) == 1,
          "t_schedule_2s: clamped to one step");

  // Theorem stepsize limit case.
  c.check(std::abs(theoretical_stepsize(0.0, 1, 1.0, 1.0, 100) - 0.1) <= 1e-14,
          "theoretical_stepsize: complete-graph case");

  // Averaging identities on a short toy run.
  {
    const ProblemSpec toy = toy_mpec();
    TopologyParams tp;
    tp.rng_seed = seed;
    const MixingMatrix w = metropolis_weights(build_topology(Topology::ring, 3, tp));
    RunConfig cfg;
    cfg.mode = Stage::single_stage;
    cfg.oracle = OracleMode::exact;
    cfg.gamma = 1e-2;
    cfg.eta = 0.1;
    cfg.horizon_k = 10;
    cfg.master_seed = seed;
    cfg.common_init = false;
    cfg.x0 = Eigen::VectorXd::Constant(1, -1.0);
    SwarmState s = init_swarm(toy, w, cfg);
    bool ok = true;
    for (long k = 0; k < cfg.horizon_k && ok; ++k) {
      const SwarmState nxt = step_single_stage(s, w, toy, cfg);
      Eigen::VectorXd g_mean = Eigen::VectorXd::Zero(1);
      for (const auto& a : nxt.agents) g_mean += a.g_prev;
      g_mean /= 3.0;
      Eigen::VectorXd y_mean = Eigen::VectorXd::Zero(1);
      for (const auto& a : nxt.agents) y_mean += a.y;
      y_mean /= 3.0;
      if ((y_mean - g_mean).cwiseAbs().maxCoeff() > 1e-10) ok = false;
      const Eigen::VectorXd want = s.x_mean() - cfg.gamma * y_mean;
      if ((nxt.x_mean() - want).cwiseAbs().maxCoeff() > 1e-10) ok = false;
      s = nxt;
    }
    c.check(ok, "tracking: averaging identities over 10 iterations");

    // Rerun determinism.
    RunConfig cfg2 = cfg;
    const Trajectory a = run(cfg, toy, w);
    const Trajectory b = run(cfg2, toy, w);
    bool same = a.records.size() == b.records.size();
    for (std::size_t i = 0; same && i < a.records.size(); ++i)
      same = a.records[i].consensus_error == b.records[i].consensus_error;
    for (int i = 0; same && i < 3; ++i)
      same = a.final_state.agents[i].x == b.final_state.agents[i].x;
    c.check(same, "run: bitwise rerun determinism");
  }

  return c.failures;
}

}  // namespace zogt
