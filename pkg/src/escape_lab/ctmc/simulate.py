"""Exact path simulation, local time and the trace (time-changed) path."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import BeyondRecordedTime, NeverVisitsSubset
from ..graph import WeightedGraph
from . import kernel as K

__all__ = [
    "Trajectory",
    "simulate_trajectory",
    "simulate_batch",
    "stream_rng",
    "local_time",
    "time_change",
    "state_at",
    "subset_mask",
    "worker_count",
    "STATUS_NAMES",
    "DEFAULT_STALL_TOL",
]

STATUS_NAMES = {
    K.HORIZON: "HorizonReached",
    K.BUDGET: "BudgetExhausted",
    K.LEFT: "LeftTruncation",
    K.ABSORBED: "Absorbed",
    K.OCCUPIED: "OccupationReached",
}
EXPLODED = "Exploded"
# Stall threshold as a fraction of the horizon; see the explosion notes in the README.
DEFAULT_STALL_TOL = 1e-4

_FIRST_BLOCK = 256
_MAX_BLOCK = 1 << 20


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for trajectory ``stream`` of a batch seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("ESCAPE_LAB_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


@dataclass(frozen=True)
class Trajectory:
    """Jump chain of one path: ``states[i]`` is held on ``[times[i], times[i+1])``.

    ``states`` index into ``order``; the last state is held until ``end_time``.
    When ``recorded`` is false only the first and last states are kept.
    """

    times: np.ndarray
    states: np.ndarray
    order: list
    status: str
    seed: int
    stream: int
    end_time: float
    n_jumps: int
    recorded: bool = True
    occupation: float = 0.0
    checkpoint_jumps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    checkpoint_times: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def jumps(self) -> list:
        return [(float(t), self.order[s]) for t, s in zip(self.times, self.states)]

    @property
    def vertices(self) -> list:
        return [self.order[s] for s in self.states]

    @property
    def final_vertex(self):
        return self.order[self.states[-1]]

    def time_at_jump(self, n: int) -> float:
        i = np.searchsorted(self.checkpoint_jumps, n)
        if i < len(self.checkpoint_jumps) and self.checkpoint_jumps[i] == n:
            return float(self.checkpoint_times[i])
        if self.recorded and n < len(self.times):
            return float(self.times[n])
        raise KeyError(n)


def subset_mask(order: list, subset) -> np.ndarray:
    """Boolean mask over ``order`` from a set, a predicate or a ready mask."""
    if isinstance(subset, np.ndarray) and subset.dtype == np.bool_:
        return subset
    if callable(subset):
        return np.fromiter((bool(subset(v)) for v in order), dtype=np.bool_, count=len(order))
    subset = set(subset)
    return np.fromiter((v in subset for v in order), dtype=np.bool_, count=len(order))


def simulate_trajectory(
    g: WeightedGraph,
    x0,
    horizon: float,
    jump_budget: int,
    seed: int,
    *,
    stream: int = 0,
    stall_tol: float = DEFAULT_STALL_TOL,
    stop=None,
    occupation_subset=None,
    occupation_limit: float = math.inf,
    record: bool = True,
    checkpoints=(),
) -> Trajectory:
    """Simulate the minimal chain from ``x0``.

    Holding times are ``-log(U)/Deg(x)`` with ``U`` in ``(0, 1]``; the next
    vertex is drawn proportionally to ``w(x, .)``.  The path stops at
    ``horizon``, on entering a truncation-boundary vertex, on entering
    ``stop``, once the time spent in ``occupation_subset`` reaches
    ``occupation_limit``, or after ``jump_budget`` jumps.  A budget stop is
    reported as ``Exploded`` when the last quarter of the budget advanced the
    clock by less than ``stall_tol * horizon``.
    """
    g.check(x0)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if jump_budget < 1:
        raise ValueError("jump_budget must be >= 1")
    csr = g.csr
    n_v = len(csr.order)
    stop_mask = np.zeros(n_v, dtype=np.bool_) if stop is None else subset_mask(csr.order, stop)
    occ_mask = np.zeros(n_v, dtype=np.bool_) if occupation_subset is None else subset_mask(csr.order, occupation_subset)
    return _simulate(csr, csr.index[x0], horizon, jump_budget, seed, stream, stall_tol, stop_mask, occ_mask,
                     occupation_limit, record, checkpoints)


def _simulate(csr, start, horizon, budget, seed, stream, stall_tol, stop_mask, occ_mask, occ_limit, record, checkpoints):
    three_quarters = budget - budget // 4
    cps = np.unique(np.asarray(list(checkpoints) + [three_quarters, budget], dtype=np.int64))
    cp_times = np.full(len(cps), np.nan)
    state = np.array([start, 0, 0.0, 0.0, K.RUNNING, 0], dtype=np.float64)
    if csr.boundary[start]:
        state[K.S_STATUS] = K.LEFT
    rng = stream_rng(seed, stream)
    cap = 1024 if record else 0
    out_t = np.empty(cap)
    out_v = np.empty(cap, dtype=np.int64)
    n_out = 0
    block = _FIRST_BLOCK
    u = np.empty(0)
    pos = 0
    while state[K.S_STATUS] == K.RUNNING:
        if pos >= len(u):
            u = 1.0 - rng.random(block)
            pos = 0
            block = min(block * 2, _MAX_BLOCK)
        if record and n_out >= len(out_t):
            out_t = np.concatenate([out_t, np.empty(len(out_t))])
            out_v = np.concatenate([out_v, np.empty(len(out_v), dtype=np.int64)])
        used, n_out = K.advance(
            csr.indptr, csr.indices, csr.cumweights, csr.rate, csr.boundary, stop_mask, occ_mask,
            occ_limit, horizon, budget, state, u[pos:], out_t, out_v, n_out, record, cps, cp_times,
        )
        pos += used
    status = STATUS_NAMES[int(state[K.S_STATUS])]
    n_jumps = int(state[K.S_N])
    end = float(state[K.S_T])
    if status == "BudgetExhausted":
        t_34 = cp_times[np.searchsorted(cps, three_quarters)]
        if end - t_34 < stall_tol * horizon:
            status = EXPLODED
    if record:
        times = np.concatenate([[0.0], out_t[:n_out]])
        states = np.concatenate([[start], out_v[:n_out]])
    else:
        times = np.array([0.0])
        states = np.array([start, int(state[K.S_V])]) if n_jumps else np.array([start])
    return Trajectory(times, states, csr.order, status, seed, stream, end, n_jumps, record,
                      float(state[K.S_OCC]), cps, cp_times)


def simulate_batch(g: WeightedGraph, x0, horizon: float, jump_budget: int, seed: int, n: int, *,
                   workers: int | None = None, first_stream: int = 0, **kwargs) -> list[Trajectory]:
    """``n`` independent paths; path ``i`` uses stream ``first_stream + i`` whatever ``n`` is."""
    g.csr  # build the shared arrays once before fanning out
    streams = range(first_stream, first_stream + n)
    run = lambda i: simulate_trajectory(g, x0, horizon, jump_budget, seed, stream=i, **kwargs)
    nw = worker_count(workers)
    if nw == 1 or n < 2:
        return [run(i) for i in streams]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(run, streams))


# ---------------------------------------------------------------------------
# local time and trace


def _hold_ends(traj: Trajectory) -> np.ndarray:
    return np.append(traj.times[1:], traj.end_time)


def local_time(traj: Trajectory, subset, t: float) -> float:
    """Lebesgue time spent in ``subset`` during ``[0, t]``."""
    if not traj.recorded:
        raise ValueError("local time needs a recorded trajectory")
    if t > traj.end_time:
        raise BeyondRecordedTime(f"t = {t} beyond recorded time {traj.end_time}")
    mask = subset_mask(traj.order, subset)
    inside = mask[traj.states]
    start = traj.times
    end = np.minimum(_hold_ends(traj), t)
    dur = np.where(inside, np.clip(end - start, 0.0, None), 0.0)
    return math.fsum(dur)


def local_time_curve(traj: Trajectory, subset) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints ``(times, A)`` of the piecewise-linear occupation clock."""
    mask = subset_mask(traj.order, subset)
    inside = mask[traj.states]
    ends = _hold_ends(traj)
    dur = np.where(inside, ends - traj.times, 0.0)
    A = np.concatenate([[0.0], np.cumsum(dur)])
    return np.append(traj.times, traj.end_time), A


def time_change(traj: Trajectory, subset) -> Trajectory:
    """Trace of the path on ``subset``: holds outside it are cut out and the clock closes up."""
    if not traj.recorded:
        raise ValueError("time change needs a recorded trajectory")
    mask = subset_mask(traj.order, subset)
    inside = mask[traj.states]
    ends = _hold_ends(traj)
    dur = ends - traj.times
    if not np.any(inside & (dur > 0)):
        raise NeverVisitsSubset("the path spends no time in the subset")
    excised = np.concatenate([[0.0], np.cumsum(np.where(inside, 0.0, dur))])
    keep = inside.copy()
    new_times = traj.times - excised[:-1]
    new_end = traj.end_time - excised[-1]
    times = new_times[keep]
    states = traj.states[keep]
    # consecutive repeats are one continuous hold in the trace
    if len(states) > 1:
        first = np.concatenate([[True], states[1:] != states[:-1]])
        times, states = times[first], states[first]
    return Trajectory(times, states, traj.order, traj.status, traj.seed, traj.stream, float(new_end),
                      len(states) - 1, True, traj.occupation)


def state_at(traj: Trajectory, t: float):
    """Vertex occupied at time ``t``."""
    if t > traj.end_time or t < 0:
        raise BeyondRecordedTime(f"t = {t} outside [0, {traj.end_time}]")
    i = int(np.searchsorted(traj.times, t, side="right")) - 1
    return traj.order[traj.states[i]]
