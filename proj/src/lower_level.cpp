#include "zogt/lower_level.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zogt {

void validate_schedule(const SaSchedule& s, double mu_f, double l_f) {
  if (!(mu_f > 0.0) || !(l_f >= mu_f))
    throw std::invalid_argument("schedule: need mu_f > 0 and l_f >= mu_f");
  if (!(s.gamma_hat > 1.0 / mu_f))
    throw std::invalid_argument("schedule: gamma_hat must exceed 1/mu_f");
  if (!(s.big_gamma_hat > s.gamma_hat * l_f * l_f / mu_f))
    throw std::invalid_argument(
        "schedule: big_gamma_hat must exceed gamma_hat l_f^2 / mu_f");
  if (!(s.a > 0.5))
    throw std::invalid_argument("schedule: exponent a must exceed 0.5");
}

SaSchedule default_schedule(double mu_f, double l_f, double a) {
  SaSchedule s;
  s.gamma_hat = 2.0 / mu_f;
  s.big_gamma_hat = 1.05 * s.gamma_hat * l_f * l_f / mu_f;
  s.a = a;
  validate_schedule(s, mu_f, l_f);
  return s;
}

LowerSolveResult sa_solve(const VIInstance& vi, const Eigen::VectorXd& x_hat,
                          const Eigen::VectorXd& z0, const SaSchedule& schedule,
                          long t_k, RngStream& noise_stream) {
  if (t_k < 1) throw std::invalid_argument("sa_solve: t_k must be >= 1");
  validate_schedule(schedule, vi.mu_f, vi.l_f);
  Eigen::VectorXd z = z0;
  for (long t = 0; t < t_k; ++t) {
    const double gamma_t =
        schedule.gamma_hat / (static_cast<double>(t) + schedule.big_gamma_hat);
    const Eigen::VectorXd noise = vi.noise_sampler
                                      ? vi.noise_sampler(noise_stream)
                                      : Eigen::VectorXd();
    z = vi.projector(x_hat, z - gamma_t * vi.map_oracle(x_hat, z, noise));
  }
  LowerSolveResult out;
  out.z = std::move(z);
  out.iterations = t_k;
  const double term1 = vi.nu_f * vi.nu_f * schedule.gamma_hat /
                       (vi.mu_f * schedule.gamma_hat - 1.0);
  const double term2 = schedule.big_gamma_hat * vi.diameter_sq;
  out.schedule_epsilon = std::max(term1, term2) /
                         (static_cast<double>(t_k) + schedule.big_gamma_hat);
  return out;
}

LowerSolveResult det_solve(const VIInstance& vi, const Eigen::VectorXd& x_hat,
                           const Eigen::VectorXd& xi, const Eigen::VectorXd& z0,
                           double gamma_hat, long t_k) {
  if (t_k < 1) throw std::invalid_argument("det_solve: t_k must be >= 1");
  if (!(gamma_hat > 0.0) || gamma_hat > vi.mu_f / (vi.l_f * vi.l_f) + 1e-15)
    throw std::invalid_argument(
        "det_solve: gamma_hat must lie in (0, mu_f/l_f^2]");
  Eigen::VectorXd z = z0;
  for (long t = 0; t < t_k; ++t) {
    z = vi.projector(x_hat, z - gamma_hat * vi.map_oracle(x_hat, z, xi));
  }
  LowerSolveResult out;
  out.z = std::move(z);
  out.iterations = t_k;
  out.schedule_epsilon =
      std::pow(1.0 - vi.mu_f * gamma_hat, static_cast<double>(t_k)) *
      vi.diameter_sq;
  return out;
}

long t_schedule_1s(long k, int n, double eta, double a, double big_gamma) {
  if (!(a > 0.5)) throw std::invalid_argument("t_schedule_1s: need a > 0.5");
  if (!(eta > 0.0)) throw std::invalid_argument("t_schedule_1s: need eta > 0");
  const double value = std::sqrt(static_cast<double>(n)) *
                       std::pow(static_cast<double>(k) + big_gamma, a) /
                       std::pow(eta, 2.0 / 3.0);
  const double t = std::ceil(value);
  return t < 1.0 ? 1 : static_cast<long>(t);
}

long t_schedule_2s(long k, int n, double eta, double a, double mu_f,
                   double gamma_hat) {
  if (!(a > 0.5)) throw std::invalid_argument("t_schedule_2s: need a > 0.5");
  if (!(eta > 0.0)) throw std::invalid_argument("t_schedule_2s: need eta > 0");
  const double d = mu_f * gamma_hat;
  if (!(d > 0.0) || d >= 1.0)
    throw std::invalid_argument("t_schedule_2s: need 0 < mu_f*gamma_hat < 1");
  const double inner = std::pow(static_cast<double>(n), 1.0 / (2.0 * a)) *
                       (static_cast<double>(k) + 1.0) *
                       std::pow(eta, -2.0 / (3.0 * a));
  const double log_inner = std::log(inner);
  if (log_inner <= 0.0) return 1;
  const double t = std::ceil(-a / std::log1p(-d) * log_inner);
  return t < 1.0 ? 1 : static_cast<long>(t);
}

long t_schedule_2s_experiment(long k, int n, double eta) {
  const double inner = std::sqrt(static_cast<double>(n)) *
                       (static_cast<double>(k) + 1.0) *
                       std::pow(eta, -2.0 / 3.0);
  const double log_inner = std::log(inner);
  if (log_inner <= 0.0) return 1;
  const double t = std::ceil(log_inner);
  return t < 1.0 ? 1 : static_cast<long>(t);
}

namespace {

constexpr int kMaxRows = 12;
constexpr int kMaxDim = 4;

// Gaussian elimination with partial pivoting on an s x s system, s <= 4.
// Returns false when the pivot collapses (rank-deficient subset).
bool solve_small(int s, double m[kMaxDim][kMaxDim], double rhs[kMaxDim],
                 double out[kMaxDim]) {
  for (int col = 0; col < s; ++col) {
    int piv = col;
    for (int r = col + 1; r < s; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-12) return false;
    if (piv != col) {
      for (int c = 0; c < s; ++c) std::swap(m[col][c], m[piv][c]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (int r = col + 1; r < s; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < s; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = s - 1; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < s; ++c) acc -= m[r][c] * out[c];
    out[r] = acc / m[r][r];
  }
  return true;
}

}  // namespace

ProjectionResult project_polyhedron(const Eigen::VectorXd& point,
                                    const Polyhedron& constraints) {
  const int p = static_cast<int>(point.size());
  const int q = static_cast<int>(constraints.a.rows());
  if (p < 1 || p > kMaxDim)
    throw std::invalid_argument("project_polyhedron: p must lie in [1,4]");
  if (q > 6)
    throw std::invalid_argument("project_polyhedron: at most 6 general rows");
  if (q > 0 && constraints.a.cols() != p)
    throw std::invalid_argument("project_polyhedron: A column count != p");

  // Stack rows: the q general rows a_i^T z >= b_i, then e_j^T z >= 0.
  const int rows = q + (constraints.nonneg ? p : 0);
  double ra[kMaxRows][kMaxDim];
  double rb[kMaxRows];
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < p; ++j) ra[i][j] = constraints.a(i, j);
    rb[i] = constraints.b(i);
  }
  if (constraints.nonneg) {
    for (int j = 0; j < p; ++j) {
      for (int c = 0; c < p; ++c) ra[q + j][c] = (c == j) ? 1.0 : 0.0;
      rb[q + j] = 0.0;
    }
  }

  double scale = 1.0;
  for (int i = 0; i < rows; ++i) scale = std::max(scale, std::abs(rb[i]));
  for (int j = 0; j < p; ++j) scale = std::max(scale, std::abs(point[j]));
  const double feas_tol = 1e-9 * scale;
  const double mult_tol = 1e-10 * scale;

  const double* x = point.data();
  auto feasible = [&](const double z[kMaxDim]) {
    for (int i = 0; i < rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < p; ++j) dot += ra[i][j] * z[j];
      if (dot < rb[i] - feas_tol) return false;
    }
    return true;
  };

  double best_z[kMaxDim];
  double best_lambda[kMaxDim];
  int best_set[kMaxDim];
  int best_size = -1;
  double best_dist = std::numeric_limits<double>::infinity();

  int subset[kMaxDim];
  auto try_subset = [&](int s) -> bool {
    // Least-distance point with rows `subset` active: z = x + M^T lambda,
    // (M M^T) lambda = c - M x.
    double gram[kMaxDim][kMaxDim];
    double rhs[kMaxDim];
    for (int r = 0; r < s; ++r) {
      const double* ar = ra[subset[r]];
      for (int c = 0; c <= r; ++c) {
        const double* ac = ra[subset[c]];
        double dot = 0.0;
        for (int j = 0; j < p; ++j) dot += ar[j] * ac[j];
        gram[r][c] = gram[c][r] = dot;
      }
      double ax = 0.0;
      for (int j = 0; j < p; ++j) ax += ar[j] * x[j];
      rhs[r] = rb[subset[r]] - ax;
    }
    double lambda[kMaxDim];
    if (s > 0 && !solve_small(s, gram, rhs, lambda)) return false;
    for (int r = 0; r < s; ++r)
      if (lambda[r] < -mult_tol) return false;
    double z[kMaxDim];
    for (int j = 0; j < p; ++j) {
      double acc = x[j];
      for (int r = 0; r < s; ++r) acc += lambda[r] * ra[subset[r]][j];
      z[j] = acc;
    }
    if (!feasible(z)) return false;
    double dist = 0.0;
    for (int j = 0; j < p; ++j) dist += (z[j] - x[j]) * (z[j] - x[j]);
    if (dist < best_dist) {
      best_dist = dist;
      best_size = s;
      for (int j = 0; j < p; ++j) best_z[j] = z[j];
      for (int r = 0; r < s; ++r) {
        best_lambda[r] = lambda[r];
        best_set[r] = subset[r];
      }
    }
    return true;  // full KKT point: projection found
  };

  bool done = false;
  if (try_subset(0)) done = true;
  for (int s = 1; s <= std::min(p, rows) && !done; ++s) {
    for (int j = 0; j < s; ++j) subset[j] = j;
    while (true) {
      if (try_subset(s)) {
        done = true;
        break;
      }
      int j = s - 1;
      while (j >= 0 && subset[j] == rows - s + j) --j;
      if (j < 0) break;
      ++subset[j];
      for (int c = j + 1; c < s; ++c) subset[c] = subset[c - 1] + 1;
    }
  }

  if (best_size < 0)
    throw std::runtime_error(
        "project_polyhedron: no feasible candidate (empty polyhedron?)");

  ProjectionResult out;
  out.z = Eigen::Map<const Eigen::VectorXd>(best_z, p);
  out.active.assign(best_set, best_set + best_size);
  out.multipliers = Eigen::Map<const Eigen::VectorXd>(best_lambda, best_size);
  return out;
}

Eigen::VectorXd random_feasible_start(const VIInstance& vi,
                                      const Eigen::VectorXd& x_hat,
                                      RngStream& rng) {
  return vi.projector(x_hat, rng.gaussian(vi.dim_p));
}

}  // namespace zogt
