"""Monte Carlo estimators used to cross-check the linear and ODE solvers."""
from __future__ import annotations

import math

import numpy as np

from ..graph import WeightedGraph
from .simulate import simulate_batch

__all__ = ["mc_hitting", "mc_exit_cdf", "mc_jump_counts"]


def mc_hitting(g: WeightedGraph, start, targets, n: int, seed: int, *, budget: int = 10**7) -> dict:
    """Empirical first-entry distribution over ``targets`` with standard errors."""
    targets = list(dict.fromkeys(targets))
    paths = simulate_batch(g, start, math.inf, budget, seed, n, stop=set(targets), record=False)
    counts = dict.fromkeys(targets, 0)
    for p in paths:
        if p.status == "Absorbed":
            counts[p.final_vertex] += 1
    out = {}
    for y, c in counts.items():
        p = c / n
        out[y] = (p, math.sqrt(p * (1 - p) / n))
    return out


def mc_exit_cdf(g: WeightedGraph, K, x, t_grid, n: int, seed: int, *, budget: int = 10**7):
    """Empirical ``P_x(tau_K <= t)`` and its standard error on ``t_grid``."""
    t_grid = np.asarray(t_grid, dtype=float)
    Kset = set(K)
    outside = [v for v in g.vertices if v not in Kset]
    paths = simulate_batch(g, x, float(t_grid.max()) * (1 + 1e-12), budget, seed, n, stop=outside, record=False)
    exits = np.array([p.end_time if p.status in ("Absorbed", "LeftTruncation") else math.inf for p in paths])
    p = (exits[None, :] <= t_grid[:, None]).mean(axis=1)
    return p, np.sqrt(p * (1 - p) / n)


def mc_jump_counts(g: WeightedGraph, x0, horizon: float, n: int, seed: int, *, budget: int = 10**7) -> np.ndarray:
    paths = simulate_batch(g, x0, horizon, budget, seed, n, record=False)
    return np.array([p.n_jumps for p in paths])
