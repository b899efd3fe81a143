#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "zogt/lower_level.hpp"

using namespace zogt;

namespace {

VIInstance scalar_vi(std::function<double(double)> f, double mu, double l,
                     double lo, double hi) {
  VIInstance vi;
  vi.dim_p = 1;
  vi.map_oracle = [f](const Eigen::VectorXd&, const Eigen::VectorXd& z,
                      const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, f(z[0])).eval();
  };
  vi.projector = [lo, hi](const Eigen::VectorXd&, const Eigen::VectorXd& p) {
    return Eigen::VectorXd::Constant(1, std::clamp(p[0], lo, hi)).eval();
  };
  vi.mu_f = mu;
  vi.l_f = l;
  vi.diameter_sq = (hi - lo) * (hi - lo);
  return vi;
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(validate_schedule({0.9, 10.0, 1.0}, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({2.0, 1.9, 1.0}, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({2.0, 10.0, 0.5}, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_schedule({2.0, 4.0, 1.0}, 1.0, 1.0));
  CHECK_NOTHROW(validate_schedule(default_schedule(2.0, 2.0), 2.0, 2.0));
}

TEST_CASE("sa_solve: one-step arithmetic on F(z) = z") {
  VIInstance vi = scalar_vi([](double z) { return z; }, 1.0, 1.0, -kInf, kInf);
  RngStream rng(1, 0);
  // gamma_0 = gamma_hat / big_gamma_hat = 0.5
  const auto res = sa_solve(vi, Eigen::VectorXd::Zero(1),
                            Eigen::VectorXd::Constant(1, 1.0), {2.0, 4.0, 1.0},
                            1, rng);
  CHECK(res.z[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(res.iterations == 1);
}

TEST_CASE("sa_solve: noiseless affine VI against the recursion oracle") {
  // F(z) = 2z - 3 on [0, 10]: solution 1.5.
  VIInstance vi =
      scalar_vi([](double z) { return 2.0 * z - 3.0; }, 2.0, 2.0, 0.0, 10.0);
  RngStream rng(2, 0);
  const SaSchedule sched{2.0, 9.0, 1.0};
  const auto res = sa_solve(vi, Eigen::VectorXd::Zero(1),
                            Eigen::VectorXd::Constant(1, 8.0), sched, 200, rng);
  CHECK(std::abs(res.z[0] - 1.5) <= 1e-2);

  double z = 8.0;  // independent re-run of the recursion
  for (long t = 0; t < 200; ++t) {
    const double gamma_t = 2.0 / (t + 9.0);
    z = std::clamp(z - gamma_t * (2.0 * z - 3.0), 0.0, 10.0);
  }
  CHECK(res.z[0] == doctest::Approx(z).epsilon(1e-15));
}

TEST_CASE("sa_solve: O(1/t) decay on the stochastic quadratic VI") {
  // F(z, xi) = 2z - xi with xi ~ U[2,4]: z* = 1.5, nu^2 = 1/3.
  VIInstance vi =
      scalar_vi([](double) { return 0.0; }, 2.0, 2.0, 0.0, 10.0);
  vi.map_oracle = [](const Eigen::VectorXd&, const Eigen::VectorXd& z,
                     const Eigen::VectorXd& xi) {
    return Eigen::VectorXd::Constant(1, 2.0 * z[0] - xi[0]).eval();
  };
  vi.noise_sampler = [](RngStream& rng) {
    return Eigen::VectorXd::Constant(1, rng.uniform(2.0, 4.0)).eval();
  };
  vi.nu_f = std::sqrt(1.0 / 3.0);

  const SaSchedule sched{1.0, 4.0, 1.0};  // gamma_hat > 1/2, big > 2
  const std::vector<double> ts{100, 1000, 10000};
  std::vector<double> mse(ts.size(), 0.0);
  const int reps = 50;
  for (int r = 0; r < reps; ++r) {
    RngStream noise(100 + r, 0);
    RngStream init(200 + r, 0);
    Eigen::VectorXd z0 = Eigen::VectorXd::Constant(1, init.uniform(0.0, 10.0));
    // One long trajectory, sampled at the three horizons.
    Eigen::VectorXd z = z0;
    long done = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const long target = static_cast<long>(ts[i]);
      for (long t = done; t < target; ++t) {
        const double gamma_t = sched.gamma_hat / (t + sched.big_gamma_hat);
        const Eigen::VectorXd xi = vi.noise_sampler(noise);
        z = vi.projector({}, z - gamma_t * vi.map_oracle({}, z, xi));
      }
      done = target;
      mse[i] += (z[0] - 1.5) * (z[0] - 1.5) / reps;
    }
  }
  CHECK(oracles::loglog_slope(ts, mse) <= -0.8);
}

TEST_CASE("sa_solve result stays feasible and reports the schedule bound") {
  VIInstance vi =
      scalar_vi([](double z) { return 2.0 * z - 3.0; }, 2.0, 2.0, 0.0, 10.0);
  RngStream rng(3, 0);
  const SaSchedule sched{2.0, 9.0, 1.0};
  const auto res = sa_solve(vi, Eigen::VectorXd::Zero(1),
                            Eigen::VectorXd::Constant(1, 4.0), sched, 50, rng);
  const Eigen::VectorXd back = vi.projector({}, res.z);
  CHECK((back - res.z).cwiseAbs().maxCoeff() <= 1e-10);
  // max{nu^2 g/(mu g - 1), G D}/(t + G) with nu = 0 here.
  CHECK(res.schedule_epsilon ==
        doctest::Approx(9.0 * 100.0 / (50.0 + 9.0)).epsilon(1e-12));
}

TEST_CASE("det_solve: exact one-step solve at gamma = mu/l^2 = 1") {
  VIInstance vi = scalar_vi([](double z) { return z; }, 1.0, 1.0, -kInf, kInf);
  const auto res = det_solve(vi, Eigen::VectorXd::Zero(1), {},
                             Eigen::VectorXd::Constant(1, 4.0), 1.0, 1);
  CHECK(res.z[0] == 0.0);
  CHECK_THROWS_AS(det_solve(vi, Eigen::VectorXd::Zero(1), {},
                            Eigen::VectorXd::Constant(1, 4.0), 1.5, 1),
                  std::invalid_argument);
}

TEST_CASE("det_solve: per-step contraction on the scalar market cell") {
  // F(z) = (c + b) z - q + b z with c = 0.3, b = 0.1, q = 2: affine with
  // slope 0.5, solution z* = 4.
  const double c = 0.3, b = 0.1, q = 2.0;
  VIInstance vi = scalar_vi(
      [=](double z) { return (c + b) * z - q + b * z; }, c + 2 * b, c + 2 * b,
      -kInf, kInf);
  const double zstar = q / (c + 2 * b);
  const double gamma = 0.2;  // <= mu/l^2 = 2
  Eigen::VectorXd z = Eigen::VectorXd::Constant(1, 9.0);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd next =
        det_solve(vi, Eigen::VectorXd::Zero(1), {}, z, gamma, 1).z;
    const double ratio = std::abs(next[0] - zstar) / std::abs(z[0] - zstar);
    CHECK(ratio <= (1.0 - vi.mu_f * gamma) + 1e-9);
    z = next;
  }
  CHECK(std::abs(z[0] - zstar) <=
        std::pow(1.0 - vi.mu_f * gamma, 100.0) * 5.0 * (1 + 1e-9));
}

TEST_CASE("det_solve: multi-follower market VI against a dense linear solve") {
  const int p = 3;
  Eigen::Vector3d c(0.1, 0.2, 0.3);
  const double b = 0.1, a = 10.0;
  VIInstance vi;
  vi.dim_p = p;
  vi.map_oracle = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                      const Eigen::VectorXd&) {
    return (((c.array() + b) * z.array()) + b * z.sum() - a + b * x[0])
        .matrix()
        .eval();
  };
  vi.projector = [](const Eigen::VectorXd&, const Eigen::VectorXd& pt) {
    return pt.cwiseMax(0.0).eval();
  };
  vi.mu_f = c.minCoeff() + b;
  vi.l_f = c.maxCoeff() + b + b * p;

  RngStream rng(5, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, rng.uniform(0, 3));
    Eigen::MatrixXd m =
        Eigen::MatrixXd(c.asDiagonal()) + b * Eigen::MatrixXd::Identity(p, p) +
        b * Eigen::MatrixXd::Ones(p, p);
    const Eigen::VectorXd rhs =
        Eigen::VectorXd::Constant(p, a - b * x[0]);
    const Eigen::VectorXd direct = Eigen::FullPivLU<Eigen::MatrixXd>(m).solve(rhs);
    if (direct.minCoeff() < 0) continue;
    const auto res = det_solve(vi, x, {}, Eigen::VectorXd::Zero(p),
                               vi.mu_f / (vi.l_f * vi.l_f), 200);
    CHECK((res.z - direct).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("growth rule values") {
  CHECK(t_schedule_1s(0, 1, 1.0, 1.0, 1.0) == 1);
  CHECK(t_schedule_1s(9, 4, 0.1, 1.0, 1.0) == 93);
  CHECK(t_schedule_1s(0, 2, 0.1, 1.0, 1.0) == 7);
  CHECK_THROWS_AS(t_schedule_1s(0, 1, 1.0, 0.5, 1.0), std::invalid_argument);

  CHECK(t_schedule_2s(0, 1, 1.0, 1.0, 1.0, 0.5) == 1);
  CHECK(t_schedule_2s(0, 1, 0.1, 1.0, 1.0, 0.5) == 3);
  CHECK_THROWS_AS(t_schedule_2s(0, 1, 0.1, 1.0, 2.0, 0.5),
                  std::invalid_argument);
  // Experiment form folds the rate constant: ceil(ln(sqrt(n)(k+1)/eta^{2/3})).
  CHECK(t_schedule_2s_experiment(99, 1, 0.1) ==
        static_cast<long>(std::ceil(std::log(100.0 * std::pow(0.1, -2.0 / 3)))));
  CHECK(t_schedule_2s_experiment(0, 1, 1.0) == 1);
}

TEST_CASE("lemma-style schedule bound holds empirically") {
  // Same stochastic quadratic VI; bound is
  // max{nu^2 g/(mu g - 1), G D} / (t_k + G).
  const double mu = 2.0, nu2 = 1.0 / 3.0, D = 100.0;
  const SaSchedule sched{1.0, 4.0, 1.0};
  VIInstance vi = scalar_vi([](double) { return 0.0; }, mu, 2.0, 0.0, 10.0);
  vi.map_oracle = [](const Eigen::VectorXd&, const Eigen::VectorXd& z,
                     const Eigen::VectorXd& xi) {
    return Eigen::VectorXd::Constant(1, 2.0 * z[0] - xi[0]).eval();
  };
  vi.noise_sampler = [](RngStream& rng) {
    return Eigen::VectorXd::Constant(1, rng.uniform(2.0, 4.0)).eval();
  };
  vi.nu_f = std::sqrt(nu2);
  vi.diameter_sq = D;

  for (const long t_k : {100L, 1000L}) {
    double mse = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      RngStream noise(4000 + r, t_k);
      RngStream init(8000 + r, t_k);
      const Eigen::VectorXd z0 =
          Eigen::VectorXd::Constant(1, init.uniform(0.0, 10.0));
      const auto res = sa_solve(vi, Eigen::VectorXd::Zero(1), z0, sched, t_k,
                                noise);
      mse += (res.z[0] - 1.5) * (res.z[0] - 1.5) / reps;
    }
    const double bound =
        std::max(nu2 * sched.gamma_hat / (mu * sched.gamma_hat - 1.0),
                 sched.big_gamma_hat * D) /
        (static_cast<double>(t_k) + sched.big_gamma_hat);
    CHECK(mse <= 1.5 * bound);
  }
}

TEST_CASE("projection: orthant and single-facet examples") {
  Polyhedron orthant{Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), true};
  const auto r1 = project_polyhedron(Eigen::Vector2d(-1, -1), orthant);
  CHECK(r1.z.cwiseAbs().maxCoeff() == 0.0);
  CHECK(oracles::kkt_residual(Eigen::Vector2d(-1, -1), orthant, r1) <= 1e-10);

  Polyhedron facet{Eigen::MatrixXd(1, 2), Eigen::VectorXd(1), true};
  facet.a << 1, 1;
  facet.b << 3;
  const auto r2 = project_polyhedron(Eigen::Vector2d(2, 0), facet);
  CHECK((r2.z - Eigen::Vector2d(2.5, 0.5)).norm() <= 1e-12);
  CHECK(oracles::kkt_residual(Eigen::Vector2d(2, 0), facet, r2) <= 1e-10);
}

TEST_CASE("projection: random instances against the grid oracle") {
  RngStream rng(6, 0);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int p = trial % 2 == 0 ? 2 : 3;
    const int q = 1 + static_cast<int>(rng() % 3);
    Polyhedron poly;
    poly.a.resize(q, p);
    poly.b.resize(q);
    poly.nonneg = true;
    Eigen::VectorXd feas(p);
    for (int j = 0; j < p; ++j) feas[j] = rng.uniform(0.0, 2.0);
    for (int i = 0; i < q; ++i) {
      // Rows kept away from mutual near-parallelism so the grid oracle can
      // resolve every wedge the instances create.
      while (true) {
        for (int j = 0; j < p; ++j) poly.a(i, j) = rng.normal();
        const double norm = poly.a.row(i).norm();
        if (norm < 0.3) continue;
        bool ok = true;
        for (int r = 0; r < i && ok; ++r) {
          const double cosang = std::abs(poly.a.row(i).dot(poly.a.row(r))) /
                                (norm * poly.a.row(r).norm());
          if (cosang > 0.95) ok = false;
        }
        if (ok) break;
      }
      poly.b[i] = poly.a.row(i).dot(feas) - std::abs(rng.normal());
    }
    Eigen::VectorXd point(p);
    for (int j = 0; j < p; ++j) point[j] = rng.normal() * 3.0;

    const auto res = project_polyhedron(point, poly);
    const Eigen::VectorXd ref = oracles::grid_projection(point, poly, feas);
    REQUIRE(ref.size() == p);
    const double d_impl = (res.z - point).norm();
    const double d_ref = (ref - point).norm();
    CHECK(std::abs(d_impl - d_ref) <= 1e-4);
    CHECK(oracles::kkt_residual(point, poly, res) <= 1e-8);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("projection: idempotence and nonexpansivity") {
  RngStream rng(7, 0);
  for (int trial = 0; trial < 100; ++trial) {
    Polyhedron poly;
    poly.a.resize(2, 2);
    poly.b.resize(2);
    poly.nonneg = true;
    Eigen::Vector2d feas(rng.uniform(0, 2), rng.uniform(0, 2));
    for (int i = 0; i < 2; ++i) {
      poly.a(i, 0) = rng.normal();
      poly.a(i, 1) = rng.normal();
      poly.b[i] = poly.a.row(i).dot(feas) - std::abs(rng.normal());
    }
    const Eigen::Vector2d u(rng.normal() * 4, rng.normal() * 4);
    const Eigen::Vector2d v(rng.normal() * 4, rng.normal() * 4);
    const Eigen::VectorXd pu = project_polyhedron(u, poly).z;
    const Eigen::VectorXd pv = project_polyhedron(v, poly).z;
    CHECK((project_polyhedron(pu, poly).z - pu).norm() <= 1e-12);
    CHECK((pu - pv).norm() <= (u - v).norm() + 1e-12);
  }
}

TEST_CASE("projection: empty polyhedron is detected") {
  Polyhedron poly;
  poly.a.resize(1, 1);
  poly.a << -1.0;  // -z >= 1 contradicts z >= 0
  poly.b.resize(1);
  poly.b << 1.0;
  poly.nonneg = true;
  CHECK_THROWS_AS(project_polyhedron(Eigen::VectorXd::Zero(1), poly),
                  std::runtime_error);
}

TEST_CASE("random feasible start lands in the set") {
  VIInstance vi = scalar_vi([](double z) { return z; }, 1.0, 1.0, 0.0, 5.0);
  RngStream rng(8, 0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd z0 =
        random_feasible_start(vi, Eigen::VectorXd::Zero(1), rng);
    CHECK(z0[0] >= 0.0);
    CHECK(z0[0] <= 5.0);
  }
}
