#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "zogt/problems.hpp"

using namespace zogt;

TEST_CASE("toy: exact solution map and implicit values") {
  const ProblemSpec toy = toy_mpec();
  CHECK(toy.exact_z(Eigen::VectorXd::Constant(1, -2.0))[0] == 0.0);
  CHECK(toy.exact_z(Eigen::VectorXd::Constant(1, 3.0))[0] == 3.0);

  auto implicit = [&](double x) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    return toy.h_tilde(xv, toy.exact_z(xv), {});
  };
  CHECK(implicit(-1.0) == 0.0);
  for (double x : {0.0, 0.5, 2.0}) CHECK(implicit(x) == doctest::Approx(1.0));

  // Identity against the closed form on a grid.
  for (int i = 0; i <= 100; ++i) {
    const double x = -3.0 + 6.0 * i / 100.0;
    const double direct = std::pow(x + 1.0 - std::max(0.0, x), 2.0);
    CHECK(implicit(x) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("bilevel: map formula and feasibility arithmetic") {
  const ProblemSpec prob = bilevel_benchmark(20);
  Eigen::Vector2d y(1.0, 2.0);
  Eigen::Vector2d xi(6.0, 4.0);  // upper draw unused by the map
  const Eigen::VectorXd f = prob.f_map(Eigen::Vector2d::Zero(), y, xi);
  CHECK(f[0] == 2.0);
  CHECK(f[1] == 0.0);

  // At x = 0 the point (2,1) satisfies both rows (the first with equality).
  const Eigen::VectorXd kept =
      prob.project(Eigen::Vector2d::Zero(), Eigen::Vector2d(2.0, 1.0));
  CHECK((kept - Eigen::Vector2d(2.0, 1.0)).norm() <= 1e-12);
}

TEST_CASE("bilevel: expectation-VI solution vs long projection run") {
  const ProblemSpec prob = bilevel_benchmark(20);
  const Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  const Eigen::VectorXd zstar = prob.exact_z(x0);
  // Hand-derived active-set solution at the origin.
  CHECK(zstar[0] == doctest::Approx(1.875).epsilon(1e-12));
  CHECK(zstar[1] == doctest::Approx(1.625).epsilon(1e-12));

  // Deterministic projection run on the expectation map F = (2y1, 2y2-4.5).
  VIInstance vi = make_vi(prob);
  vi.map_oracle = [](const Eigen::VectorXd&, const Eigen::VectorXd& y,
                     const Eigen::VectorXd&) {
    return Eigen::Vector2d(2.0 * y[0], 2.0 * y[1] - 4.5).eval();
  };
  const auto res = det_solve(vi, x0, {}, Eigen::Vector2d::Zero(), 0.5, 10000);
  CHECK((res.z - zstar).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("bilevel: scenario solution is a projected fixed point") {
  const ProblemSpec prob = bilevel_benchmark(5);
  RngStream rng(21, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Vector2d x(rng.normal(), rng.normal());
    const Eigen::VectorXd xi = prob.sample_xi(rng);
    const Eigen::VectorXd z = prob.exact_z_scenario(x, xi);
    const Eigen::VectorXd back = prob.project(x, z - prob.f_map(x, z, xi));
    CHECK((back - z).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("problems: strong monotonicity and Lipschitz certificates") {
  RngStream rng(22, 0);
  for (const auto& prob :
       {toy_mpec(), bilevel_benchmark(5), cournot_game(4, 5, true)}) {
    for (int rep = 0; rep < 1000; ++rep) {
      Eigen::VectorXd x = rng.gaussian(prob.n);
      Eigen::VectorXd xi = prob.sample_xi(rng);
      if (xi.size() == 0) xi = Eigen::VectorXd::Zero(1);
      const Eigen::VectorXd z1 = rng.gaussian(prob.p) * 3.0;
      const Eigen::VectorXd z2 = rng.gaussian(prob.p) * 3.0;
      const Eigen::VectorXd df =
          prob.f_map(x, z1, xi) - prob.f_map(x, z2, xi);
      const Eigen::VectorXd dz = z1 - z2;
      CHECK(df.dot(dz) >= prob.mu_f * dz.squaredNorm() - 1e-9);
      CHECK(df.norm() <= prob.l_f * dz.norm() + 1e-9);
    }
  }
}

TEST_CASE("cournot: scalar follower solution") {
  CournotParams params;
  params.costs = Eigen::VectorXd::Constant(1, 0.3);
  const ProblemSpec prob = cournot_game(1, 3, false, params);
  const Eigen::VectorXd z = prob.exact_z_scenario(
      Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 10.0));
  CHECK(z[0] == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("cournot: negative demand pins the followers at zero") {
  CournotParams params;
  params.costs = Eigen::VectorXd::Constant(2, 0.3);
  const ProblemSpec prob = cournot_game(2, 3, true, params);
  const Eigen::VectorXd z = prob.exact_z_scenario(
      Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -1.0));
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cournot: interior solve matches the projection method") {
  CournotParams params;
  params.costs.resize(3);
  params.costs << 0.1, 0.2, 0.3;
  const ProblemSpec prob = cournot_game(3, 5, true, params);
  const VIInstance vi = make_vi(prob);
  RngStream rng(23, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, rng.uniform(0, 5));
    const Eigen::VectorXd xi = prob.sample_xi(rng);
    const Eigen::VectorXd direct = prob.exact_z_scenario(x, xi);
    if (direct.minCoeff() < 0) continue;
    const auto res =
        det_solve(vi, x, xi, Eigen::VectorXd::Zero(3),
                  prob.mu_f / (prob.l_f * prob.l_f), 10000);
    CHECK((res.z - direct).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("cournot: random costs come from the documented range") {
  const ProblemSpec prob = cournot_game(20, 20, true);
  CHECK(prob.mu_f >= 0.05 + 0.1 - 1e-12);
  CHECK(prob.mu_f <= 0.5 + 0.1 + 1e-12);
  CHECK(prob.l_f <= 0.5 + 0.1 + 0.1 * 20 + 1e-12);
  // exact scenario solutions are projected fixed points
  RngStream rng(24, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, rng.uniform(0, 10));
    const Eigen::VectorXd xi = prob.sample_xi(rng);
    const Eigen::VectorXd z = prob.exact_z_scenario(x, xi);
    const Eigen::VectorXd back = prob.project(
        x, z - prob.mu_f / (prob.l_f * prob.l_f) * prob.f_map(x, z, xi));
    CHECK((back - z).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("toy: exact fixed point of one projected step") {
  const ProblemSpec toy = toy_mpec();
  RngStream rng(25, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd x = rng.gaussian(1) * 2.0;
    const Eigen::VectorXd z = toy.exact_z(x);
    const Eigen::VectorXd back = toy.project(x, z - toy.f_map(x, z, {}));
    CHECK((back - z).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("estimate_implicit_objective: toy values with the exact oracle") {
  const ProblemSpec toy = toy_mpec();
  EvalOptions opts;
  opts.exact = true;
  opts.samples = 16;
  RngStream rng(26, 0);
  CHECK(std::abs(estimate_implicit_objective(
            toy, Eigen::VectorXd::Constant(1, -1.0), opts, rng)) <= 1e-9);
  CHECK(std::abs(estimate_implicit_objective(
            toy, Eigen::VectorXd::Constant(1, 1.0), opts, rng) -
                 1.0) <= 1e-9);
}

TEST_CASE("estimate_implicit_objective: bilevel against brute force") {
  const ProblemSpec prob = bilevel_benchmark(20);
  const Eigen::Vector2d x0 = Eigen::Vector2d::Zero();

  // Brute force with exact lower solves over 1e5 scenario draws.
  RngStream brute_rng(27, 0);
  const Eigen::VectorXd zstar = prob.exact_z(x0);
  double brute = 0;
  const long brute_n = 100000;
  std::vector<double> vals;
  vals.reserve(brute_n);
  for (long s = 0; s < brute_n; ++s) {
    const Eigen::VectorXd xi = prob.sample_xi(brute_rng);
    vals.push_back(prob.h_tilde(x0, zstar, xi));
  }
  const auto bstats = oracles::mean_stderr(vals);
  brute = bstats.mean;
  // The closed form: -E[xi]*z1 + z2^2 with z* = (1.875, 1.625).
  CHECK(brute == doctest::Approx(-6.5 * 1.875 + 1.625 * 1.625).epsilon(1e-3));

  EvalOptions opts;
  opts.exact = true;
  opts.samples = 20000;
  RngStream rng(28, 0);
  const double est = estimate_implicit_objective(prob, x0, opts, rng);
  const double se_est = 1.63 / std::sqrt(static_cast<double>(opts.samples));
  CHECK(std::abs(est - brute) <= 3.0 * (se_est + bstats.stderr_));

  // The solver path with the experiment protocol lands nearby as well.
  EvalOptions inexact;
  inexact.exact = false;
  inexact.samples = 4000;
  inexact.lower_iters = 150;
  inexact.sa = default_schedule(prob.mu_f, prob.l_f);
  RngStream rng2(29, 0);
  const double est2 = estimate_implicit_objective(prob, x0, inexact, rng2);
  CHECK(std::abs(est2 - brute) <= 0.2);
}
