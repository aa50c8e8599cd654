"""Minimal continuous-time Markov chain of a weighted graph."""
from .montecarlo import mc_exit_cdf, mc_hitting, mc_jump_counts
from .simulate import (
    DEFAULT_STALL_TOL,
    Trajectory,
    local_time,
    local_time_curve,
    simulate_batch,
    simulate_trajectory,
    state_at,
    stream_rng,
    subset_mask,
    time_change,
    worker_count,
)
from .solvers import (
    ExitSolution,
    MaxPrincipleReport,
    exit_time_cdf,
    hitting_probabilities,
    solve_exit_problem,
    verify_integral_max_principle,
)

__all__ = [
    "DEFAULT_STALL_TOL", "Trajectory", "ExitSolution", "MaxPrincipleReport",
    "simulate_trajectory", "simulate_batch", "stream_rng", "worker_count", "subset_mask",
    "local_time", "local_time_curve", "time_change", "state_at",
    "hitting_probabilities", "solve_exit_problem", "exit_time_cdf", "verify_integral_max_principle",
    "mc_hitting", "mc_exit_cdf", "mc_jump_counts",
]
