"""Deterministic counterparts of the chain: hitting probabilities, exit-time
distributions and the integral maximum principle check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.integrate import cumulative_simpson

from ..errors import HypothesisViolated, SingularSystem, TruncationTooSmall
from ..graph import WeightedGraph, vertex_key

__all__ = [
    "hitting_probabilities",
    "ExitSolution",
    "solve_exit_problem",
    "exit_time_cdf",
    "MaxPrincipleReport",
    "verify_integral_max_principle",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 2000


def _component(g: WeightedGraph, start, blocked: set) -> list:
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            if y not in seen and y not in blocked:
                seen.add(y)
                stack.append(y)
    return sorted(seen, key=vertex_key)


def hitting_probabilities(g: WeightedGraph, start, targets) -> dict:
    """Probability that the chain from ``start`` first enters ``targets`` at each target.

    Solves the Dirichlet problem ``Delta h = 0`` off the targets with
    indicator boundary values, on the component of ``start`` in the
    complement of the targets.  That component must avoid the truncation
    boundary.
    """
    g.check(start)
    targets = list(dict.fromkeys(targets))
    for y in targets:
        g.check(y)
    if start in targets:
        return {y: float(y == start) for y in targets}
    tset = set(targets)
    comp = _component(g, start, tset)
    touching = [x for x in comp if x in g.boundary]
    if touching:
        raise TruncationTooSmall(f"the walk can reach the truncation boundary at {touching[0]!r} before the targets")
    idx = {x: i for i, x in enumerate(comp)}
    tidx = {y: j for j, y in enumerate(targets)}
    n = len(comp)
    rows, cols, vals = [], [], []
    rhs = np.zeros((n, len(targets)))
    for x in comp:
        i = idx[x]
        diag = 0.0
        for y, w in g.neighbors(x).items():
            diag += w
            if y in idx:
                rows.append(i)
                cols.append(idx[y])
                vals.append(-w)
            else:
                rhs[i, tidx[y]] += w
        rows.append(i)
        cols.append(i)
        vals.append(diag)
    if not rhs.any():
        raise SingularSystem("no target is adjacent to the reachable set")
    A = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if n <= DENSE_LIMIT:
        lu = scipy.linalg.lu_factor(A.toarray(), check_finite=True)
        if np.any(np.abs(np.diag(lu[0])) < 1e-300):
            raise SingularSystem("singular Dirichlet system")
        h = scipy.linalg.lu_solve(lu, rhs)
    else:
        try:
            h = scipy.sparse.linalg.splu(A.tocsc()).solve(rhs)
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from None
    row = h[idx[start]]
    return {y: float(row[tidx[y]]) for y in targets}


# ---------------------------------------------------------------------------
# exit times


@dataclass(frozen=True)
class ExitSolution:
    """``u[i, j] = P_{vertices[j]}(tau_K <= t_grid[i])``."""

    vertices: list
    t_grid: np.ndarray
    u: np.ndarray
    step: float

    def column(self, x) -> np.ndarray:
        return self.u[:, self.vertices.index(x)]

    def as_dict(self, i: int) -> dict:
        return dict(zip(self.vertices, self.u[i].tolist()))


def _killed_generator(g: WeightedGraph, K: list):
    idx = {x: i for i, x in enumerate(K)}
    rows, cols, vals = [], [], []
    for x in K:
        i = idx[x]
        mu = g.mu(x)
        deg = 0.0
        for y, w in g.neighbors(x).items():
            deg += w
            if y in idx:
                rows.append(i)
                cols.append(idx[y])
                vals.append(w / mu)
        rows.append(i)
        cols.append(i)
        vals.append(-deg / mu)
    n = len(K)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _rk4(A, t_grid: np.ndarray, h_max: float) -> np.ndarray:
    """Survival ``v' = A v``, ``v(0) = 1`` sampled on ``t_grid`` with steps ``<= h_max``."""
    v = np.ones(A.shape[0])
    out = np.empty((len(t_grid), A.shape[0]))
    t = 0.0
    for i, target in enumerate(t_grid):
        span = target - t
        if span > 0:
            steps = max(1, math.ceil(span / h_max - 1e-12))
            h = span / steps
            for _ in range(steps):
                k1 = A @ v
                k2 = A @ (v + 0.5 * h * k1)
                k3 = A @ (v + 0.5 * h * k2)
                k4 = A @ (v + h * k3)
                v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = target
        out[i] = v
    return out


def solve_exit_problem(g: WeightedGraph, K, t_grid, *, tol: float = 1e-8, max_halvings: int = 12) -> ExitSolution:
    """Exit-time distribution from the finite set ``K`` for every start in ``K``.

    Integrates ``dv/dt = -L_K v`` for the survival ``v = 1 - u`` with classical
    RK4.  The step starts at ``min(0.01, 0.1 / max Deg over cl(K))`` and is
    halved until two successive solutions agree to ``tol`` in sup norm.
    """
    K = sorted(dict.fromkeys(K), key=vertex_key)
    if not K:
        raise ValueError("K must be nonempty")
    for x in K:
        g.check(x)
        if x in g.boundary:
            raise TruncationTooSmall(f"{x!r} lies on the truncation boundary; its neighbourhood is incomplete")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0) or np.any(t_grid < 0):
        raise ValueError("t_grid must be nonnegative and sorted")
    closure = set(K)
    for x in K:
        closure.update(g.neighbors(x))
    max_deg = max(math.fsum(g.neighbors(x).values()) / g.mu(x) for x in closure)
    A = _killed_generator(g, K)
    h = min(0.01, 0.1 / max_deg)
    prev = _rk4(A, t_grid, h)
    for _ in range(max_halvings):
        h /= 2.0
        cur = _rk4(A, t_grid, h)
        if np.max(np.abs(cur - prev)) <= tol:
            prev = cur
            break
        prev = cur
    u = np.clip(1.0 - prev, 0.0, 1.0)
    # monotone in t up to rounding
    u = np.maximum.accumulate(u, axis=0)
    return ExitSolution(K, t_grid, u, h)


def exit_time_cdf(g: WeightedGraph, K, x, t_grid) -> np.ndarray:
    """``P_x(tau_K <= t)`` on ``t_grid``."""
    sol = solve_exit_problem(g, K, t_grid)
    return sol.column(x)


# ---------------------------------------------------------------------------
# integral maximum principle


@dataclass
class MaxPrincipleReport:
    ok: bool
    hypotheses: dict
    failures: list = field(default_factory=list)
    lhs: np.ndarray | None = None
    rhs: np.ndarray | None = None
    s_grid: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_integral_max_principle(
    g: WeightedGraph,
    K,
    L,
    solution: ExitSolution,
    eta: Mapping,
    xi: Callable,
    T: float,
    *,
    dxi_dt: Callable | None = None,
    hyp_tol: float = 1e-12,
    raise_on_hypothesis: bool = True,
) -> MaxPrincipleReport:
    """Check the four hypotheses, then the energy inequality at every grid time ``s <= T``.

    ``xi(x, t)`` and ``dxi_dt(x, t)`` must accept a numpy array of times.
    ``solution`` must be the exit problem of ``L`` on a grid starting at 0;
    it is sampled at its own grid for both sides.  The inequality passes when
    ``LHS <= RHS (1 + 1e-6) + 1e-9 max(LHS, RHS)`` at every ``s``.
    """
    L = sorted(dict.fromkeys(L), key=vertex_key)
    Lset = set(L)
    Kset = set(K)
    if not Kset:
        raise ValueError("K must be nonempty")
    interior = {x for x in L if x not in g.boundary and set(g.neighbors(x)) <= Lset}
    t = solution.t_grid[solution.t_grid <= T + 1e-15]
    if len(t) < 3 or t[0] != 0.0:
        raise ValueError("solution grid must start at 0 and have at least 3 points up to T")
    col = {x: j for j, x in enumerate(solution.vertices)}
    missing = [x for x in L if x not in col]
    if missing:
        raise ValueError(f"solution lacks vertex {missing[0]!r} of L")
    et = {x: float(eta.get(x, 0.0)) for x in L}
    hyp = {1: True, 2: True, 3: True, 4: True, "K_in_int_L": Kset <= interior}
    failures = []

    # (1) eta >= 0 with support in K
    for x, v in eta.items():
        if v < 0 or (v != 0 and x not in Kset):
            hyp[1] = False
            failures.append((1, x, v))
    # (2) xi continuously differentiable: compare the supplied derivative with differences
    XI = {x: np.asarray(xi(x, t), dtype=float) for x in L}
    for x in L:
        if not np.all(np.isfinite(XI[x])):
            hyp[2] = False
            failures.append((2, x, "non-finite"))
    if dxi_dt is not None:
        for x in L:
            fd = np.gradient(XI[x], t)
            dx = np.asarray(dxi_dt(x, t), dtype=float)
            if np.max(np.abs(fd - dx)) > 1e-6 * (1 + np.max(np.abs(dx))):
                hyp[2] = False
                failures.append((2, x, float(np.max(np.abs(fd - dx)))))
    else:
        dxi_dt = lambda x, tt: np.gradient(XI[x], tt)
    # (3) monotone pairing of eta^2 and e^xi along edges inside L
    for x in L:
        for y in g.neighbors(x):
            if y in Lset and vertex_key(x) < vertex_key(y):
                prod = (et[x] ** 2 - et[y] ** 2) * (np.exp(XI[x]) - np.exp(XI[y]))
                if np.min(prod) < -hyp_tol:
                    hyp[3] = False
                    failures.append((3, (x, y), float(np.min(prod))))
    # (4) mu d_t xi + 1/2 sum_{y in L} w (1 - e^{xi(y) - xi(x)})^2 <= 0
    for x in L:
        total = g.mu(x) * np.asarray(dxi_dt(x, t), dtype=float)
        for y, w in g.neighbors(x).items():
            if y in Lset:
                total = total + 0.5 * w * (1.0 - np.exp(XI[y] - XI[x])) ** 2
        if np.max(total) > hyp_tol * (1 + g.mu(x)):
            hyp[4] = False
            failures.append((4, x, float(np.max(total))))

    if failures and raise_on_hypothesis:
        which = sorted({f[0] for f in failures})
        raise HypothesisViolated(f"hypotheses {which} fail", failures)

    U = solution.u[: len(t)]
    lhs = np.zeros(len(t))
    for x in Kset:
        if et[x]:
            lhs += U[:, col[x]] ** 2 * et[x] ** 2 * np.exp(XI[x]) * g.mu(x)
    integrand = np.zeros(len(t))
    for x in L:
        for y, w in g.neighbors(x).items():
            if y in Lset and et[x] != et[y]:
                integrand += w * (et[x] - et[y]) ** 2 * U[:, col[y]] ** 2 * np.exp(XI[x])
    rhs = 2.0 * cumulative_simpson(integrand, x=t, initial=0.0)
    # both sides carry e^xi, which can be tiny; the absolute slack scales with them
    atol = 1e-9 * max(float(np.max(lhs)), float(np.max(rhs)))
    ok_ineq = bool(np.all(lhs <= rhs * (1 + 1e-6) + atol))
    if not ok_ineq:
        bad = int(np.argmax(lhs - rhs))
        failures.append(("conclusion", float(t[bad]), float(lhs[bad]), float(rhs[bad])))
    ok = ok_ineq and all(hyp[k] for k in (1, 2, 3, 4)) and hyp["K_in_int_L"]
    return MaxPrincipleReport(ok, hyp, failures, lhs, rhs, t)
