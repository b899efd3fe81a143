#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zogt/harness.hpp"
#include "zogt/smoothing.hpp"

namespace py = pybind11;
using namespace zogt;

PYBIND11_MODULE(_zogt, m) {
  m.doc() = "distributed zeroth-order gradient tracking for stochastic MPECs";

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
           py::arg("stream_id") = 0)
      .def("uniform", [](RngStream& r) { return r.uniform(); })
      .def("normal", &RngStream::normal);

  py::enum_<Topology>(m, "Topology")
      .value("complete", Topology::complete)
      .value("ring", Topology::ring)
      .value("sparse", Topology::sparse)
      .value("tree", Topology::tree)
      .value("erdos_renyi", Topology::erdos_renyi);

  py::class_<Graph>(m, "Graph")
      .def_readonly("m", &Graph::m)
      .def_readonly("edges", &Graph::edges);

  py::class_<MixingMatrix>(m, "MixingMatrix")
      .def_readonly("w", &MixingMatrix::w)
      .def_readonly("lambda_w", &MixingMatrix::lambda_w);

  m.def(
      "build_topology",
      [](const std::string& kind, int m_agents, double sparse_degree,
         double er_probability, std::uint64_t seed) {
        TopologyParams p;
        p.sparse_degree = sparse_degree;
        p.er_probability = er_probability;
        p.rng_seed = seed;
        return build_topology(topology_from_string(kind), m_agents, p);
      },
      py::arg("kind"), py::arg("m"), py::arg("sparse_degree") = 3.0,
      py::arg("er_probability") = 0.2, py::arg("seed") = 0);
  m.def("metropolis_weights", &metropolis_weights);
  m.def("spectral_gap", &spectral_gap);
  m.def("mix", &mix);
  m.def("consensus_error", &consensus_error);

  m.def(
      "sample_unit_sphere",
      [](RngStream& rng, int n) { return sample_unit_sphere(rng, n).v; },
      py::arg("rng"), py::arg("n"));
  m.def(
      "zo_gradient",
      [](double h_plus, double h_minus, const Eigen::VectorXd& v, double eta,
         int n) {
        return zo_gradient(h_plus, h_minus, SphereDirection{v}, eta, n).g;
      },
      py::arg("h_plus"), py::arg("h_minus"), py::arg("v"), py::arg("eta"),
      py::arg("n"));
  m.def("smoothed_value_mc",
        [](const ScalarFn& h, const Eigen::VectorXd& x, double eta,
           long samples, RngStream& rng) {
          return smoothed_value_mc(h, x, eta, samples, rng);
        });
  m.def("smoothed_grad_norm_mc",
        [](const ScalarFn& h, const Eigen::VectorXd& x, double eta,
           long samples, RngStream& rng) {
          return smoothed_grad_norm_mc(h, x, eta, samples, rng);
        });

  m.def("t_schedule_1s", &t_schedule_1s, py::arg("k"), py::arg("n"),
        py::arg("eta"), py::arg("a") = 1.0, py::arg("big_gamma") = 1.0);
  m.def("t_schedule_2s", &t_schedule_2s, py::arg("k"), py::arg("n"),
        py::arg("eta"), py::arg("a"), py::arg("mu_f"), py::arg("gamma_hat"));
  m.def("t_schedule_2s_experiment", &t_schedule_2s_experiment);
  m.def("theoretical_stepsize", &theoretical_stepsize, py::arg("lambda_w"),
        py::arg("n"), py::arg("eta"), py::arg("l0"), py::arg("k_horizon"));

  m.def(
      "project_polyhedron",
      [](const Eigen::VectorXd& point, const Eigen::MatrixXd& a,
         const Eigen::VectorXd& b, bool nonneg) {
        const auto res = project_polyhedron(point, Polyhedron{a, b, nonneg});
        return py::make_tuple(res.z, res.active, res.multipliers);
      },
      py::arg("point"), py::arg("a"), py::arg("b"), py::arg("nonneg") = true);

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def_readonly("name", &ProblemSpec::name)
      .def_readonly("n", &ProblemSpec::n)
      .def_readonly("p", &ProblemSpec::p)
      .def_readonly("mu_f", &ProblemSpec::mu_f)
      .def_readonly("l_f", &ProblemSpec::l_f)
      .def("exact_z",
           [](const ProblemSpec& prob, const Eigen::VectorXd& x) {
             if (!prob.has_exact_z())
               throw std::runtime_error("no exact oracle");
             return prob.exact_z(x);
           })
      .def("h_tilde", [](const ProblemSpec& prob, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& z, const Eigen::VectorXd& xi) {
        return prob.h_tilde(x, z, xi);
      });

  m.def("toy_mpec", &toy_mpec);
  m.def("bilevel_benchmark", &bilevel_benchmark, py::arg("num_agents"));
  m.def(
      "cournot_game",
      [](int followers, int agents, bool shift) {
        return cournot_game(followers, agents, shift);
      },
      py::arg("num_followers"), py::arg("num_agents"),
      py::arg("include_leader_shift") = true);

  m.def(
      "estimate_implicit_objective",
      [](const ProblemSpec& prob, const Eigen::VectorXd& x, long lower_iters,
         long samples, bool exact, std::uint64_t seed) {
        EvalOptions opts;
        opts.lower_iters = lower_iters;
        opts.samples = samples;
        opts.exact = exact;
        if (prob.stage == Stage::single_stage && !exact)
          opts.sa = default_schedule(prob.mu_f, prob.l_f);
        RngStream rng = make_stream(seed, StreamPurpose::eval_noise);
        return estimate_implicit_objective(prob, x, opts, rng);
      },
      py::arg("problem"), py::arg("x"), py::arg("lower_iters") = 150,
      py::arg("samples") = 50, py::arg("exact") = false, py::arg("seed") = 0);

  py::class_<CheckpointRecord>(m, "CheckpointRecord")
      .def_readonly("k", &CheckpointRecord::k)
      .def_readonly("consensus_error", &CheckpointRecord::consensus_error)
      .def_readonly("tracker_norm", &CheckpointRecord::tracker_norm)
      .def_readonly("objective_estimate", &CheckpointRecord::objective_estimate);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("records", &Trajectory::records)
      .def_readonly("seed", &Trajectory::seed)
      .def_property_readonly("final_x", [](const Trajectory& t) {
        return t.final_state.x_matrix();
      });

  m.def(
      "run",
      [](const ProblemSpec& prob, const MixingMatrix& w, bool two_stage,
         bool exact, double gamma, double eta, long horizon_k, int minibatch,
         std::uint64_t seed, const Eigen::VectorXd& x0,
         const std::vector<long>& checkpoints) {
        RunConfig cfg;
        cfg.mode = two_stage ? Stage::two_stage : Stage::single_stage;
        cfg.oracle = exact ? OracleMode::exact : OracleMode::inexact;
        cfg.gamma = gamma;
        cfg.eta = eta;
        cfg.horizon_k = horizon_k;
        cfg.minibatch = minibatch;
        cfg.master_seed = seed;
        cfg.x0 = x0;
        if (cfg.oracle == OracleMode::inexact)
          cfg.schedule.sa = default_schedule(prob.mu_f, prob.l_f);
        MetricHooks hooks;
        hooks.checkpoints = checkpoints;
        return run(cfg, prob, w, hooks);
      },
      py::arg("problem"), py::arg("w"), py::arg("two_stage") = false,
      py::arg("exact") = true, py::arg("gamma") = 1e-2, py::arg("eta") = 0.1,
      py::arg("horizon_k") = 100, py::arg("minibatch") = 1, py::arg("seed") = 0,
      py::arg("x0") = Eigen::VectorXd(),
      py::arg("checkpoints") = std::vector<long>{});
}
