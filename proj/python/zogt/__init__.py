"""Distributed zeroth-order gradient tracking for stochastic MPECs."""

from ._zogt import (  # noqa: F401
    CheckpointRecord,
    Graph,
    MixingMatrix,
    ProblemSpec,
    RngStream,
    Topology,
    Trajectory,
    bilevel_benchmark,
    build_topology,
    consensus_error,
    cournot_game,
    estimate_implicit_objective,
    metropolis_weights,
    mix,
    project_polyhedron,
    run,
    sample_unit_sphere,
    smoothed_grad_norm_mc,
    smoothed_value_mc,
    spectral_gap,
    t_schedule_1s,
    t_schedule_2s,
    t_schedule_2s_experiment,
    theoretical_stepsize,
    toy_mpec,
    zo_gradient,
)

__all__ = [name for name in dir() if not name.startswith("_")]
