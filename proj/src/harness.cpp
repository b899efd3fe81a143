#include "zogt/harness.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace zogt {

namespace {

const std::set<std::string> kKnownKeys = {
    "problem",      "mode",
    "oracle",       "m",
    "topologies",   "gamma",
    "eta",          "K",
    "minibatch",    "epochs",
    "lower_iters",  "eval_samples",
    "sample_paths", "seed",
    "out_dir",      "schedule.a",
    "schedule.gamma_hat", "schedule.big_gamma_hat",
    "schedule.variant",   "leader_box",
    "include_leader_shift", "d",
    "x_u",          "p_followers"};

const std::set<std::string> kRequiredKeys = {"problem", "mode", "m",
                                             "gamma",   "eta",  "K"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + v +
                      "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x))
    throw ConfigError("config: key '" + key + "' must be an integer");
  return static_cast<long>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key '" + key + "' must be a boolean, got '" + v +
                    "'");
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::array<double, 3>>& rows,
               bool last_is_index) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << header << "\n";
  char buf[96];
  for (const auto& r : rows) {
    if (last_is_index) {
      std::snprintf(buf, sizeof(buf), "%ld,%.17g,%ld",
                    static_cast<long>(r[0]), r[1], static_cast<long>(r[2]));
    } else {
      std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g",
                    static_cast<long>(r[0]), r[1], r[2]);
    }
    os << buf << "\n";
  }
}

}  // namespace

void validate_plan(const ExperimentPlan& plan) {
  if (plan.problem != "toy" && plan.problem != "bilevel" &&
      plan.problem != "cournot")
    throw ConfigError("config: unknown problem '" + plan.problem + "'");
  if (plan.m < 1) throw ConfigError("config: m must be >= 1");
  if (plan.sample_paths < 1)
    throw ConfigError("config: sample_paths must be >= 1");
  if (plan.eval.epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (plan.eval.epochs > plan.horizon_k + 1)
    throw ConfigError("config: epochs must be <= K");
  if (plan.topologies.empty())
    throw ConfigError("config: topologies must be nonempty");
  if (!(plan.gamma > 0) || !(plan.eta > 0))
    throw ConfigError("config: gamma and eta must be > 0");
  if (plan.horizon_k < 1) throw ConfigError("config: K must be >= 1");
  if (plan.minibatch < 1) throw ConfigError("config: minibatch must be >= 1");
  if (plan.eval.lower_iters < 1)
    throw ConfigError("config: lower_iters must be >= 1");
  if (plan.eval.eval_samples < 1)
    throw ConfigError("config: eval_samples must be >= 1");
  if (plan.p_followers < 1)
    throw ConfigError("config: p_followers must be >= 1");
}

ExperimentPlan parse_plan(const std::map<std::string, std::string>& kv) {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : kv)
    if (!kKnownKeys.count(k)) unknown.push_back(k);
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  std::vector<std::string> missing;
  for (const auto& k : kRequiredKeys)
    if (!kv.count(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string msg = "config: missing required keys:";
    for (const auto& k : missing) msg += " " + k;
    throw ConfigError(msg);
  }

  ExperimentPlan plan;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  plan.problem = *get("problem");
  {
    const std::string& mode = *get("mode");
    if (mode == "single_stage" || mode == "1s")
      plan.mode = Stage::single_stage;
    else if (mode == "two_stage" || mode == "2s")
      plan.mode = Stage::two_stage;
    else
      throw ConfigError("config: mode must be single_stage or two_stage");
  }
  if (auto* v = get("oracle")) {
    if (*v == "exact")
      plan.oracle = OracleMode::exact;
    else if (*v == "inexact")
      plan.oracle = OracleMode::inexact;
    else
      throw ConfigError("config: oracle must be exact or inexact");
  }
  plan.m = static_cast<int>(to_long("m", *get("m")));
  if (auto* v = get("topologies")) {
    plan.topologies.clear();
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) plan.topologies.push_back(topology_from_string(tok));
    }
  }
  plan.gamma = to_double("gamma", *get("gamma"));
  plan.eta = to_double("eta", *get("eta"));
  plan.horizon_k = to_long("K", *get("K"));
  if (auto* v = get("minibatch"))
    plan.minibatch = static_cast<int>(to_long("minibatch", *v));
  if (auto* v = get("epochs"))
    plan.eval.epochs = static_cast<int>(to_long("epochs", *v));
  if (auto* v = get("lower_iters"))
    plan.eval.lower_iters = to_long("lower_iters", *v);
  if (auto* v = get("eval_samples"))
    plan.eval.eval_samples = static_cast<int>(to_long("eval_samples", *v));
  if (auto* v = get("sample_paths"))
    plan.sample_paths = static_cast<int>(to_long("sample_paths", *v));
  if (auto* v = get("seed"))
    plan.seed = static_cast<std::uint64_t>(to_long("seed", *v));
  if (auto* v = get("out_dir")) plan.out_dir = *v;
  if (auto* v = get("schedule.a")) plan.sa.a = to_double("schedule.a", *v);
  if (auto* v = get("schedule.gamma_hat"))
    plan.sa.gamma_hat = to_double("schedule.gamma_hat", *v);
  if (auto* v = get("schedule.big_gamma_hat"))
    plan.sa.big_gamma_hat = to_double("schedule.big_gamma_hat", *v);
  if (auto* v = get("schedule.variant")) {
    if (*v == "theorem")
      plan.variant = ScheduleVariant::theorem;
    else if (*v == "experiment")
      plan.variant = ScheduleVariant::experiment;
    else
      throw ConfigError("config: schedule.variant must be theorem|experiment");
  }
  if (auto* v = get("leader_box")) {
    if (*v != "none") {
      const auto comma = v->find(',');
      if (comma == std::string::npos)
        throw ConfigError("config: leader_box must be 'lo,hi' or 'none'");
      plan.leader_box = {to_double("leader_box", trim(v->substr(0, comma))),
                         to_double("leader_box", trim(v->substr(comma + 1)))};
    }
  }
  if (auto* v = get("include_leader_shift"))
    plan.include_leader_shift = to_bool("include_leader_shift", *v);
  if (auto* v = get("d")) plan.d = to_double("d", *v);
  if (auto* v = get("x_u")) plan.x_u = to_double("x_u", *v);
  if (auto* v = get("p_followers"))
    plan.p_followers = static_cast<int>(to_long("p_followers", *v));

  validate_plan(plan);
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open plan file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value at line " +
                        std::to_string(lineno));
    if (kv.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return parse_plan(kv);
}

ProblemSpec instantiate_problem(const ExperimentPlan& plan) {
  if (plan.problem == "toy") return toy_mpec();
  if (plan.problem == "bilevel") return bilevel_benchmark(plan.m);
  CournotParams params;
  params.d = plan.d;
  params.x_u = plan.x_u;
  ProblemSpec prob =
      cournot_game(plan.p_followers, plan.m, plan.include_leader_shift, params);
  return prob;
}

SaSchedule resolve_schedule(const ExperimentPlan& plan,
                            const ProblemSpec& problem) {
  SaSchedule sa = plan.sa;
  if (sa.gamma_hat <= 0.0 || sa.big_gamma_hat <= 0.0) {
    const SaSchedule derived =
        default_schedule(problem.mu_f, problem.l_f, sa.a);
    if (sa.gamma_hat <= 0.0) sa.gamma_hat = derived.gamma_hat;
    if (sa.big_gamma_hat <= 0.0) sa.big_gamma_hat = derived.big_gamma_hat;
  }
  // The stochastic-approximation schedule is consumed only by inexact
  // single-stage runs; two-stage runs use the constant-stepsize solver.
  if (plan.mode == Stage::single_stage && plan.oracle == OracleMode::inexact)
    validate_schedule(sa, problem.mu_f, problem.l_f);
  return sa;
}

RunConfig run_config_from_plan(const ExperimentPlan& plan) {
  RunConfig cfg;
  cfg.mode = plan.mode;
  cfg.oracle = plan.oracle;
  cfg.gamma = plan.gamma;
  cfg.eta = plan.eta;
  cfg.horizon_k = plan.horizon_k;
  cfg.minibatch = plan.minibatch;
  cfg.schedule.sa = plan.sa;
  cfg.schedule.variant = plan.variant;
  cfg.leader_box = plan.leader_box;
  cfg.master_seed = plan.seed;
  return cfg;
}

std::vector<long> plan_checkpoints(const ExperimentPlan& plan) {
  std::vector<long> marks;
  const int e = plan.eval.epochs;
  if (e == 1) return {0};
  for (int j = 0; j < e; ++j) {
    marks.push_back(static_cast<long>(std::lround(
        static_cast<double>(j) * static_cast<double>(plan.horizon_k) /
        static_cast<double>(e - 1))));
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  return marks;
}

double consensus_error(const Eigen::MatrixXd& x) {
  if (x.rows() < 1)
    throw std::invalid_argument("consensus_error: empty matrix");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).squaredNorm();
}

namespace {

// Metric hook shared by the distributed runs and the baseline: estimates the
// implicit objective at the current mean iterate.
MetricHooks make_hooks(const ExperimentPlan& plan, const ProblemSpec& problem,
                       std::uint64_t run_seed, long total_eval_samples) {
  MetricHooks hooks;
  hooks.checkpoints = plan_checkpoints(plan);
  EvalOptions eval;
  eval.lower_iters = plan.eval.lower_iters;
  eval.samples = total_eval_samples;
  eval.exact = plan.oracle == OracleMode::exact;
  eval.sa = plan.sa;
  // Common random numbers across checkpoints: every epoch reuses the same
  // eval stream, so trend differences between epochs are not drowned by the
  // Monte Carlo noise of independent estimates.
  hooks.on_checkpoint = [problem, run_seed, eval](
                            long, const SwarmState& s, CheckpointRecord& rec) {
    RngStream rng = make_stream(run_seed, StreamPurpose::eval_noise);
    rec.objective_estimate =
        estimate_implicit_objective(problem, s.x_mean(), eval, rng);
  };
  return hooks;
}

RunOutcome run_one(const ExperimentPlan& plan, const ProblemSpec& problem,
                   const MixingMatrix& w, RunConfig cfg, int run_index,
                   std::uint64_t run_seed, long total_eval_samples) {
  cfg.master_seed = run_seed;
  RunOutcome out;
  out.run_index = run_index;
  out.seed = run_seed;
  const MetricHooks hooks =
      make_hooks(plan, problem, run_seed, total_eval_samples);

  try {
    out.trajectory = run(cfg, problem, w, hooks);
  } catch (const DivergenceError& err) {
    out.diverged = true;
    out.diverged_at = err.iteration;
    out.trajectory = err.partial;
  }
  return out;
}

void write_metric_files(const std::string& dir, const std::string& stem,
                        const std::vector<RunOutcome>& runs) {
  std::vector<std::array<double, 3>> consensus_rows, objective_rows;
  for (const auto& r : runs) {
    for (const auto& rec : r.trajectory.records) {
      consensus_rows.push_back({static_cast<double>(rec.k),
                                rec.consensus_error,
                                static_cast<double>(r.run_index)});
      objective_rows.push_back({static_cast<double>(rec.k),
                                rec.objective_estimate,
                                static_cast<double>(r.run_index)});
    }
  }
  write_csv(dir + "/" + stem + "_consensus.csv", "k,metric_value,run_index",
            consensus_rows, true);
  write_csv(dir + "/" + stem + "_objective.csv", "k,metric_value,run_index",
            objective_rows, true);

  // Means over the non-divergent paths, one row per checkpoint.
  std::map<long, std::vector<double>> by_k_cons, by_k_obj;
  for (const auto& r : runs) {
    if (r.diverged) continue;
    for (const auto& rec : r.trajectory.records) {
      by_k_cons[rec.k].push_back(rec.consensus_error);
      by_k_obj[rec.k].push_back(rec.objective_estimate);
    }
  }
  auto summarize = [](const std::map<long, std::vector<double>>& by_k) {
    std::vector<std::array<double, 3>> rows;
    for (const auto& [k, vals] : by_k) {
      double mean = 0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double var = 0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double stderr_ =
          vals.size() > 1
              ? std::sqrt(var / static_cast<double>(vals.size() - 1) /
                          static_cast<double>(vals.size()))
              : 0.0;
      rows.push_back({static_cast<double>(k), mean, stderr_});
    }
    return rows;
  };
  write_csv(dir + "/" + stem + "_consensus_mean.csv", "k,mean,stderr",
            summarize(by_k_cons), false);
  write_csv(dir + "/" + stem + "_objective_mean.csv", "k,mean,stderr",
            summarize(by_k_obj), false);
}

}  // namespace

RunOutcome centralized_baseline(const ExperimentPlan& plan) {
  ProblemSpec problem = instantiate_problem(plan);
  MixingMatrix w;
  w.w = Eigen::MatrixXd::Ones(1, 1);
  w.lambda_w = 0.0;

  ExperimentPlan resolved = plan;
  resolved.sa = resolve_schedule(plan, problem);
  RunConfig cfg = run_config_from_plan(resolved);
  cfg.minibatch = plan.minibatch * plan.m;  // same total sample budget
  const std::uint64_t run_seed = derive_seed(plan.seed, 0xBA5E11, 0);
  const long eval_total =
      static_cast<long>(plan.eval.eval_samples) * plan.m;
  return run_one(resolved, problem, w, cfg, 0, run_seed, eval_total);
}

ExperimentResult run_experiment(const ExperimentPlan& plan_in) {
  validate_plan(plan_in);
  const auto t_start = std::chrono::steady_clock::now();
  ProblemSpec problem = instantiate_problem(plan_in);
  ExperimentPlan plan = plan_in;
  plan.sa = resolve_schedule(plan_in, problem);
  RunConfig base_cfg = run_config_from_plan(plan);
  const long eval_total =
      static_cast<long>(plan.eval.eval_samples) * plan.m;

  ExperimentResult result;
  result.out_dir = plan.out_dir;
  std::filesystem::create_directories(plan.out_dir);

  nlohmann::json manifest;
  manifest["plan"] = {
      {"problem", plan.problem},
      {"mode", plan.mode == Stage::single_stage ? "single_stage" : "two_stage"},
      {"oracle", plan.oracle == OracleMode::exact ? "exact" : "inexact"},
      {"m", plan.m},
      {"gamma", plan.gamma},
      {"eta", plan.eta},
      {"K", plan.horizon_k},
      {"minibatch", plan.minibatch},
      {"sample_paths", plan.sample_paths},
      {"epochs", plan.eval.epochs},
      {"lower_iters", plan.eval.lower_iters},
      {"eval_samples", plan.eval.eval_samples},
      {"seed", plan.seed},
      {"schedule",
       {{"a", plan.sa.a},
        {"gamma_hat", plan.sa.gamma_hat},
        {"big_gamma_hat", plan.sa.big_gamma_hat},
        {"variant", plan.variant == ScheduleVariant::experiment ? "experiment"
                                                                : "theorem"}}},
      {"p_followers", plan.p_followers},
      {"include_leader_shift", plan.include_leader_shift},
      {"d", plan.d},
      {"x_u", plan.x_u}};
  manifest["runs"] = nlohmann::json::array();

  int divergent = 0, total_runs = 0;
  for (std::size_t t = 0; t < plan.topologies.size(); ++t) {
    const Topology topo = plan.topologies[t];
    TopologyParams tp;
    tp.rng_seed = derive_seed(plan.seed, 0x707F0, t);
    const Graph g = build_topology(topo, plan.m, tp);
    const MixingMatrix w = metropolis_weights(g);

    TopologyResult tres;
    tres.topology = topo;
    tres.lambda_w = w.lambda_w;
    for (int path = 0; path < plan.sample_paths; ++path) {
      const std::uint64_t run_seed = derive_seed(plan.seed, t + 1, path);
      tres.runs.push_back(run_one(plan, problem, w, base_cfg, path, run_seed,
                                  eval_total));
      ++total_runs;
      if (tres.runs.back().diverged) ++divergent;
      manifest["runs"].push_back(
          {{"topology", topology_name(topo)},
           {"run_index", path},
           {"seed", run_seed},
           {"diverged", tres.runs.back().diverged},
           {"diverged_at", tres.runs.back().diverged_at}});
    }
    write_metric_files(plan.out_dir, topology_name(topo), tres.runs);
    manifest["lambda_w"][topology_name(topo)] = w.lambda_w;
    result.topologies.push_back(std::move(tres));
  }

  // Centralized counterpart alongside, one per sample path.
  for (int path = 0; path < plan.sample_paths; ++path) {
    ExperimentPlan bplan = plan;
    bplan.seed = derive_seed(plan.seed, 0xBA5E, path);
    RunOutcome out = centralized_baseline(bplan);
    out.run_index = path;
    ++total_runs;
    if (out.diverged) ++divergent;
    manifest["runs"].push_back({{"topology", "baseline"},
                                {"run_index", path},
                                {"seed", out.seed},
                                {"diverged", out.diverged},
                                {"diverged_at", out.diverged_at}});
    result.baseline.push_back(std::move(out));
  }
  write_metric_files(plan.out_dir, "baseline", result.baseline);

  result.all_diverged = divergent == total_runs;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  std::ofstream mf(plan.out_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  return result;
}

}  // namespace zogt
