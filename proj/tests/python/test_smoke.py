"""Smoke tests for the python bindings (module built by CMake)."""

import math
import os
import sys

import numpy as np
import pytest

_module_dir = os.environ.get("ZOGT_MODULE_DIR")
if _module_dir:
    sys.path.insert(0, _module_dir)

zogt = pytest.importorskip("_zogt")


def test_topologies_and_weights():
    g = zogt.build_topology("ring", 20)
    assert g.m == 20
    assert len(g.edges) == 20
    w = zogt.metropolis_weights(g)
    assert w.w.shape == (20, 20)
    assert np.allclose(w.w.sum(axis=0), 1.0, atol=1e-12)
    assert np.allclose(w.w.sum(axis=1), 1.0, atol=1e-12)
    assert 0.9 < w.lambda_w < 1.0

    complete = zogt.metropolis_weights(zogt.build_topology("complete", 20))
    assert complete.lambda_w <= 1e-10


def test_spectral_gap_and_mix():
    w = zogt.metropolis_weights(zogt.build_topology("ring", 6))
    assert zogt.spectral_gap(w.w) == pytest.approx(w.lambda_w, abs=1e-10)
    x = np.arange(12.0).reshape(6, 2)
    mixed = zogt.mix(w, x)
    assert np.allclose(mixed.sum(axis=0), x.sum(axis=0), atol=1e-10)
    assert zogt.consensus_error(np.ones((3, 2))) == 0.0


def test_estimator_pieces():
    rng = zogt.RngStream(7, 0)
    v = zogt.sample_unit_sphere(rng, 5)
    assert abs(np.linalg.norm(v) - 1.0) <= 1e-12
    g = zogt.zo_gradient(2.0, 1.0, [1.0, 0.0], 0.5, 2)
    assert np.allclose(g, [2.0, 0.0])

    smoothed = zogt.smoothed_value_mc(
        lambda x: abs(x[0]), [0.0], 1.0, 20000, zogt.RngStream(8, 0)
    )
    assert smoothed == pytest.approx(0.5, abs=0.02)


def test_schedules_and_stepsize():
    assert zogt.t_schedule_1s(9, 4, 0.1) == 93
    assert zogt.t_schedule_1s(0, 2, 0.1) == 7
    assert zogt.t_schedule_2s(0, 1, 0.1, 1.0, 1.0, 0.5) == 3
    assert zogt.t_schedule_2s_experiment(0, 1, 1.0) == 1
    assert zogt.theoretical_stepsize(0.0, 1, 1.0, 1.0, 100) == pytest.approx(0.1)


def test_projection():
    z, active, mult = zogt.project_polyhedron(
        [-1.0, -1.0], np.zeros((0, 2)), np.zeros(0)
    )
    assert np.allclose(z, [0.0, 0.0])
    z, active, mult = zogt.project_polyhedron(
        [2.0, 0.0], np.array([[1.0, 1.0]]), np.array([3.0])
    )
    assert np.allclose(z, [2.5, 0.5], atol=1e-12)
    assert all(m >= 0 for m in mult)


def test_problems_and_run_determinism():
    toy = zogt.toy_mpec()
    assert toy.exact_z([-2.0])[0] == 0.0
    assert toy.exact_z([3.0])[0] == 3.0
    est = zogt.estimate_implicit_objective(toy, [1.0], exact=True, samples=8)
    assert est == pytest.approx(1.0, abs=1e-9)

    w = zogt.metropolis_weights(zogt.build_topology("complete", 5))
    kw = dict(
        exact=True, gamma=1e-2, eta=0.1, horizon_k=50, seed=11, x0=[-3.0],
        checkpoints=[0, 25, 50],
    )
    t1 = zogt.run(toy, w, **kw)
    t2 = zogt.run(toy, w, **kw)
    assert np.array_equal(t1.final_x, t2.final_x)
    assert [r.k for r in t1.records] == [0, 25, 50]
    assert t1.records[-1].consensus_error <= 1e-20

    cournot = zogt.cournot_game(3, 5)
    assert cournot.p == 3
    assert cournot.mu_f > 0


def test_bilevel_exact_solution():
    prob = zogt.bilevel_benchmark(20)
    z = prob.exact_z([0.0, 0.0])
    assert z == pytest.approx([1.875, 1.625], abs=1e-12)
