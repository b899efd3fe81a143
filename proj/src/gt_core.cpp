#include "zogt/gt_core.hpp"

#include <algorithm>
#include <cmath>

#include "zogt/smoothing.hpp"

namespace zogt {

void validate_config(const RunConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("config: eta must be > 0");
  if (cfg.horizon_k < 0)
    throw std::invalid_argument("config: horizon_k must be >= 0");
  if (cfg.minibatch < 1)
    throw std::invalid_argument("config: minibatch must be >= 1");
  if (cfg.leader_box && !(cfg.leader_box->first <= cfg.leader_box->second))
    throw std::invalid_argument("config: leader_box must satisfy lo <= hi");
}

Eigen::MatrixXd SwarmState::x_matrix() const {
  const int m = num_agents();
  const int n = m ? static_cast<int>(agents[0].x.size()) : 0;
  Eigen::MatrixXd out(m, n);
  for (int i = 0; i < m; ++i) out.row(i) = agents[i].x.transpose();
  return out;
}

Eigen::MatrixXd SwarmState::y_matrix() const {
  const int m = num_agents();
  const int n = m ? static_cast<int>(agents[0].y.size()) : 0;
  Eigen::MatrixXd out(m, n);
  for (int i = 0; i < m; ++i) out.row(i) = agents[i].y.transpose();
  return out;
}

Eigen::VectorXd SwarmState::x_mean() const {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(agents[0].x.size());
  for (const auto& a : agents) mean += a.x;
  return mean / static_cast<double>(agents.size());
}

SwarmState init_swarm(const ProblemSpec& problem, const MixingMatrix& w,
                      const RunConfig& cfg) {
  validate_config(cfg);
  const int m = w.size();
  const int n = problem.n;
  SwarmState state;
  state.agents.resize(m);
  Eigen::VectorXd common = cfg.x0.size() ? cfg.x0 : Eigen::VectorXd::Zero(n);
  if (common.size() != n)
    throw std::invalid_argument("config: x0 dimension does not match problem");
  for (int i = 0; i < m; ++i) {
    auto& a = state.agents[i];
    if (cfg.common_init) {
      a.x = common;
    } else {
      RngStream rng = make_stream(cfg.master_seed, StreamPurpose::init_state,
                                  static_cast<std::uint64_t>(i));
      a.x = common + cfg.init_scale * rng.gaussian(n);
    }
    a.y = Eigen::VectorXd::Zero(n);
    a.g_prev = Eigen::VectorXd::Zero(n);
  }
  return state;
}

namespace {

// Two lower-level solutions at x +- eta v for one agent / batch element.
struct PerturbedPair {
  Eigen::VectorXd z_minus, z_plus;
};

PerturbedPair lower_solutions(const SwarmState& state, const ProblemSpec& problem,
                              const RunConfig& cfg, const VIInstance& vi,
                              int agent, long k, int batch,
                              const Eigen::VectorXd& x_minus,
                              const Eigen::VectorXd& x_plus,
                              const Eigen::VectorXd& xi) {
  const auto ai = static_cast<std::uint64_t>(agent);
  const auto ak = static_cast<std::uint64_t>(k);
  const auto ab = static_cast<std::uint64_t>(batch);
  PerturbedPair out;

  if (cfg.oracle == OracleMode::exact) {
    if (cfg.mode == Stage::single_stage) {
      if (!problem.has_exact_z())
        throw std::invalid_argument("exact oracle requested but unavailable");
      out.z_minus = problem.exact_z(x_minus);
      out.z_plus = problem.exact_z(x_plus);
    } else {
      if (!problem.has_exact_z_scenario())
        throw std::invalid_argument("exact oracle requested but unavailable");
      out.z_minus = problem.exact_z_scenario(x_minus, xi);
      out.z_plus = problem.exact_z_scenario(x_plus, xi);
    }
    return out;
  }

  auto start_point = [&](const Eigen::VectorXd& x_hat, int side) {
    if (cfg.warm_start) {
      const auto& cache = side == 0 ? state.warm_minus : state.warm_plus;
      if (agent < static_cast<int>(cache.size()) && cache[agent].size())
        return vi.projector(x_hat, cache[agent]);
    }
    RngStream rng = make_stream(cfg.master_seed, StreamPurpose::lower_init, ai,
                                ak, ab, static_cast<std::uint64_t>(side));
    return random_feasible_start(vi, x_hat, rng);
  };

  if (cfg.mode == Stage::single_stage) {
    const long t_k = std::max(
        cfg.schedule.t_floor,
        cfg.schedule.variant == ScheduleVariant::experiment
            ? t_schedule_1s(k, problem.n, cfg.eta, 1.0, 1.0)
            : t_schedule_1s(k, problem.n, cfg.eta, cfg.schedule.sa.a,
                            cfg.schedule.sa.big_gamma_hat));
    for (int side = 0; side < 2; ++side) {
      const Eigen::VectorXd& x_hat = side == 0 ? x_minus : x_plus;
      RngStream noise = make_stream(cfg.master_seed, StreamPurpose::lower_noise,
                                    ai, ak, ab, static_cast<std::uint64_t>(side));
      auto res = sa_solve(vi, x_hat, start_point(x_hat, side), cfg.schedule.sa,
                          t_k, noise);
      (side == 0 ? out.z_minus : out.z_plus) = std::move(res.z);
    }
  } else {
    const double det_gamma = cfg.schedule.det_gamma_hat > 0
                                 ? cfg.schedule.det_gamma_hat
                                 : vi.mu_f / (vi.l_f * vi.l_f);
    const long t_k = std::max(
        cfg.schedule.t_floor,
        cfg.schedule.variant == ScheduleVariant::experiment
            ? t_schedule_2s_experiment(k, problem.n, cfg.eta)
            : t_schedule_2s(k, problem.n, cfg.eta, cfg.schedule.sa.a, vi.mu_f,
                            det_gamma));
    out.z_minus = det_solve(vi, x_minus, xi, start_point(x_minus, 0), det_gamma,
                            t_k).z;
    out.z_plus = det_solve(vi, x_plus, xi, start_point(x_plus, 1), det_gamma,
                           t_k).z;
  }
  return out;
}

Eigen::VectorXd agent_gradient_impl(const SwarmState& state,
                                    const ProblemSpec& problem,
                                    const RunConfig& cfg, const VIInstance& vi,
                                    int agent, PerturbedPair* warm_out) {
  const int n = problem.n;
  const long k = state.iteration;
  const double two_point_scale = static_cast<double>(n) / (2.0 * cfg.eta);
  const Eigen::VectorXd& x_local = state.agents[agent].x;

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (int b = 0; b < cfg.minibatch; ++b) {
    RngStream vdraw = make_stream(cfg.master_seed, StreamPurpose::direction,
                                  static_cast<std::uint64_t>(agent),
                                  static_cast<std::uint64_t>(k),
                                  static_cast<std::uint64_t>(b));
    const Eigen::VectorXd v = sample_unit_sphere(vdraw, n).v;
    RngStream xdraw = make_stream(cfg.master_seed, StreamPurpose::upper_noise,
                                  static_cast<std::uint64_t>(agent),
                                  static_cast<std::uint64_t>(k),
                                  static_cast<std::uint64_t>(b));
    const Eigen::VectorXd scenario = problem.sample_xi(xdraw);

    const Eigen::VectorXd x_plus = x_local + cfg.eta * v;
    const Eigen::VectorXd x_minus = x_local - cfg.eta * v;
    const PerturbedPair z = lower_solutions(state, problem, cfg, vi, agent, k,
                                            b, x_minus, x_plus, scenario);
    const double h_plus =
        problem.h_tilde_agent
            ? problem.h_tilde_agent(agent, x_plus, z.z_plus, scenario)
            : problem.h_tilde(x_plus, z.z_plus, scenario);
    const double h_minus =
        problem.h_tilde_agent
            ? problem.h_tilde_agent(agent, x_minus, z.z_minus, scenario)
            : problem.h_tilde(x_minus, z.z_minus, scenario);
    acc += two_point_scale * (h_plus - h_minus) * v;
    if (warm_out && b == cfg.minibatch - 1) *warm_out = z;
  }
  return acc / static_cast<double>(cfg.minibatch);
}

SwarmState step_impl(const SwarmState& state, const MixingMatrix& w,
                     const ProblemSpec& problem, const RunConfig& cfg) {
  const int m = state.num_agents();
  const int n = problem.n;
  const long k = state.iteration;
  if (w.size() != m)
    throw std::invalid_argument("step: mixing matrix size != agent count");
  if (m == 0 || state.agents[0].x.size() != n)
    throw std::invalid_argument("step: state dimension != problem dimension");

  const VIInstance vi = make_vi(problem);

  SwarmState next;
  next.agents = state.agents;
  next.warm_minus = state.warm_minus;
  next.warm_plus = state.warm_plus;
  const bool keep_warm = cfg.warm_start && cfg.oracle == OracleMode::inexact;
  if (keep_warm) {
    next.warm_minus.resize(m);
    next.warm_plus.resize(m);
  }

  Eigen::MatrixXd g(m, n);
  for (int i = 0; i < m; ++i) {
    PerturbedPair warm;
    g.row(i) = agent_gradient_impl(state, problem, cfg, vi, i,
                                   keep_warm ? &warm : nullptr)
                   .transpose();
    if (keep_warm) {
      next.warm_minus[i] = std::move(warm.z_minus);
      next.warm_plus[i] = std::move(warm.z_plus);
    }
  }

  // Stacked recursions: the tracker mixes the gradient increment, then the
  // decision variables mix the tracked descent step.
  Eigen::MatrixXd y_prev(m, n), g_prev(m, n), x_prev(m, n);
  for (int i = 0; i < m; ++i) {
    y_prev.row(i) = state.agents[i].y.transpose();
    g_prev.row(i) = state.agents[i].g_prev.transpose();
    x_prev.row(i) = state.agents[i].x.transpose();
  }
  const Eigen::MatrixXd y_next = w.w * (y_prev + g - g_prev);
  Eigen::MatrixXd x_next = w.w * (x_prev - cfg.gamma * y_next);
  if (cfg.mode == Stage::two_stage && cfg.leader_box) {
    x_next = x_next.cwiseMax(cfg.leader_box->first)
                 .cwiseMin(cfg.leader_box->second);
  }

  if (!x_next.allFinite() || !y_next.allFinite())
    throw DivergenceError(k, "non-finite agent state at iteration " +
                                 std::to_string(k));

  if (cfg.check_identities && !cfg.leader_box) {
    // Sampled averaging identities; both follow from double stochasticity.
    const Eigen::RowVectorXd y_mean = y_next.colwise().mean();
    const Eigen::RowVectorXd g_mean = g.colwise().mean();
    const Eigen::RowVectorXd x_mean_next = x_next.colwise().mean();
    const Eigen::RowVectorXd x_mean_prev = x_prev.colwise().mean();
    const double scale =
        1.0 + std::max(g_mean.cwiseAbs().maxCoeff(),
                       x_mean_prev.cwiseAbs().maxCoeff());
    if ((y_mean - g_mean).cwiseAbs().maxCoeff() > 1e-9 * scale ||
        (x_mean_next - (x_mean_prev - cfg.gamma * y_mean)).cwiseAbs().maxCoeff() >
            1e-9 * scale)
      throw std::runtime_error("averaging identity violated at iteration " +
                               std::to_string(k));
  }

  for (int i = 0; i < m; ++i) {
    next.agents[i].x = x_next.row(i).transpose();
    next.agents[i].y = y_next.row(i).transpose();
    next.agents[i].g_prev = g.row(i).transpose();
  }
  next.iteration = k + 1;
  return next;
}

}  // namespace

Eigen::VectorXd agent_gradient(const SwarmState& state,
                               const ProblemSpec& problem,
                               const RunConfig& cfg, const VIInstance& vi,
                               int agent) {
  return agent_gradient_impl(state, problem, cfg, vi, agent, nullptr);
}

SwarmState step_single_stage(const SwarmState& state, const MixingMatrix& w,
                             const ProblemSpec& problem, const RunConfig& cfg) {
  RunConfig c = cfg;
  c.mode = Stage::single_stage;
  return step_impl(state, w, problem, c);
}

SwarmState step_two_stage(const SwarmState& state, const MixingMatrix& w,
                          const ProblemSpec& problem, const RunConfig& cfg) {
  RunConfig c = cfg;
  c.mode = Stage::two_stage;
  return step_impl(state, w, problem, c);
}

Trajectory run(const RunConfig& cfg, const ProblemSpec& problem,
               const MixingMatrix& w, const MetricHooks& hooks) {
  validate_config(cfg);
  std::vector<long> marks = hooks.checkpoints;
  if (marks.empty()) marks = {0, cfg.horizon_k};
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  Trajectory traj;
  traj.seed = cfg.master_seed;
  SwarmState state = init_swarm(problem, w, cfg);

  auto record = [&](long k, const SwarmState& s) {
    CheckpointRecord rec;
    rec.k = k;
    const Eigen::MatrixXd x = s.x_matrix();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    rec.consensus_error = (x.rowwise() - mean).squaredNorm();
    rec.tracker_norm = s.y_matrix().colwise().mean().norm();
    if (hooks.on_checkpoint) hooks.on_checkpoint(k, s, rec);
    traj.records.push_back(std::move(rec));
  };

  std::size_t next_mark = 0;
  while (next_mark < marks.size() && marks[next_mark] < 0) ++next_mark;
  if (next_mark < marks.size() && marks[next_mark] == 0) {
    record(0, state);
    ++next_mark;
  }
  for (long k = 0; k < cfg.horizon_k; ++k) {
    try {
      state = step_impl(state, w, problem, cfg);
    } catch (DivergenceError& err) {
      err.partial = traj;
      err.partial.final_state = state;
      throw;
    }
    if (next_mark < marks.size() && marks[next_mark] == k + 1) {
      record(k + 1, state);
      ++next_mark;
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

double theoretical_stepsize(double lambda_w, int n, double eta, double l0,
                            long k_horizon) {
  if (!(lambda_w >= 0.0) || lambda_w >= 1.0)
    throw std::invalid_argument("theoretical_stepsize: need 0 <= lambda_w < 1");
  if (!(eta > 0.0) || !(l0 > 0.0) || n < 1 || k_horizon < 1)
    throw std::invalid_argument("theoretical_stepsize: bad arguments");

  const double lam2 = lambda_w * lambda_w;
  const double one_minus = 1.0 - lam2;
  const double inf = std::numeric_limits<double>::infinity();
  const double b1 = lambda_w > 0.0
                        ? std::sqrt(one_minus) / (10.0 * std::sqrt(3.0) * lam2)
                        : inf;
  const double b2 =
      lambda_w > 0.0 ? one_minus / (20.0 * lam2 * lambda_w) : inf;
  const double b3 = lambda_w > 0.0 ? one_minus * one_minus / (20.0 * lam2) : inf;
  const double b4 = 1.0 / 6.0;
  const double b5 = lambda_w > 0.0 ? one_minus / (9.0 * lambda_w) : inf;
  const double cap = std::min({b1, b2, b3, b4, b5}) * eta /
                     (std::sqrt(static_cast<double>(n)) * l0);

  const double formula =
      std::pow(eta, 2.0 / 3.0) /
      (std::sqrt(std::pow(static_cast<double>(n), 1.5) *
                 static_cast<double>(k_horizon)) *
       std::pow(l0, 1.5));
  return std::min(formula, cap);
}

}  // namespace zogt
