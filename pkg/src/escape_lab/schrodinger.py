"""Potential and super-solution on a subdivided graph.

On an interior point ``x_k`` of a subdivided edge with count ``n`` the
super-solution is ``phi(x_k) = sin(k theta + (pi - n theta)/2) / cos(n theta / 2)``
where ``cos theta = 1 - C1 sigma_o^2 / n^2``.  It equals 1 at both ends and on
the original vertices.  The potential is ``-C1`` on subdivision points and
``C2`` on original vertices, and ``(Delta + u) phi >= 0`` holds everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .graph import Sub, formal_laplacian
from .modify import ModifiedGraph

__all__ = [
    "SchrodingerConstants",
    "SchrodingerPair",
    "SupersolutionReport",
    "trig_constant",
    "schrodinger_constants",
    "edge_angle",
    "phi_formula",
    "build_schrodinger_pair",
    "verify_supersolution",
    "occupation_floor",
    "PASS_TOL",
]

PASS_TOL = 1e-9


def _ratios(theta: np.ndarray) -> np.ndarray:
    # theta / sin, tan / theta, theta / sqrt(2 (1 - cos)); the last via 2 sin(theta/2)
    return np.stack([
        theta / np.sin(theta),
        np.tan(theta) / theta,
        theta / (2.0 * np.sin(theta / 2.0)),
    ])


def trig_constant(theta_max: float, n_grid: int = 4097) -> float:
    """Smallest ``M`` with the sine, tangent and cosine comparisons on ``[0, theta_max]``.

    That is ``theta/M <= sin <= theta <= tan <= M theta`` and
    ``theta^2/(2M^2) <= 1 - cos <= theta^2/2``.  The binding ratios are
    maximized on a dense grid and the best grid point is refined locally.
    """
    if not (0.0 < theta_max < math.pi / 2):
        raise DomainError(f"theta_max must lie in (0, pi/2), got {theta_max}")
    grid = np.linspace(theta_max / n_grid, theta_max, n_grid)
    vals = _ratios(grid)
    best = float(vals.max())
    for row in range(3):
        i = int(np.argmax(vals[row]))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, n_grid - 1)]
        if hi > lo:
            res = minimize_scalar(
                lambda t: -float(_ratios(np.array([t]))[row, 0]), bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-14},
            )
            best = max(best, -float(res.fun))
    return max(best, 1.0)


@dataclass(frozen=True)
class SchrodingerConstants:
    M1: float
    C1: float
    C2: float
    C3: float

    @property
    def M0(self) -> float:
        return self.M1


def schrodinger_constants() -> SchrodingerConstants:
    M1 = trig_constant(0.5)
    # M0 is taken equal to M1, so C2 = C1 M1 M0^2 = M1 / 2
    return SchrodingerConstants(M1=M1, C1=1.0 / (2.0 * M1 * M1), C2=M1 / 2.0, C3=math.sqrt(2.0))


def occupation_floor(consts: SchrodingerConstants | None = None) -> float:
    """Reference floor ``C1 / (C1 + C2)`` for the occupation ratio."""
    c = consts or schrodinger_constants()
    return c.C1 / (c.C1 + c.C2)


def edge_angle(C1: float, sigma_o: float, n: int) -> float:
    """``theta`` with ``cos theta = 1 - C1 sigma_o^2 / n^2``.

    Evaluated as ``2 arcsin(sqrt(eps / 2))``, which is the same angle but keeps
    full relative precision when ``eps`` is tiny.
    """
    eps = C1 * sigma_o * sigma_o / (n * n)
    return 2.0 * math.asin(min(1.0, math.sqrt(eps / 2.0)))


def phi_formula(k, n: int, theta: float):
    return np.sin(k * theta + (math.pi - n * theta) / 2.0) / math.cos(n * theta / 2.0)


@dataclass
class SchrodingerPair:
    u: dict
    phi: dict
    constants: SchrodingerConstants
    theta: dict = field(default_factory=dict)  # oriented original edge -> angle


def build_schrodinger_pair(m: ModifiedGraph, constants: SchrodingerConstants | None = None) -> SchrodingerPair:
    c = constants or schrodinger_constants()
    u = {}
    phi = {}
    theta = {}
    for x in m.original.vertices:
        u[x] = c.C2
        phi[x] = 1.0
    for x, y, _ in m.original.edges():
        n = m.plan.get(x, y)
        th = edge_angle(c.C1, m.sigma_o(x, y), n)
        theta[(x, y)] = th
        ks = np.arange(1, n)
        vals = phi_formula(ks, n, th)
        # the profile is symmetric about the midpoint; enforce it bitwise
        vals = np.minimum(vals, vals[::-1])
        for k, v in zip(ks.tolist(), vals.tolist()):
            s = Sub(x, y, k)
            phi[s] = v
            u[s] = -c.C1
    return SchrodingerPair(u, phi, c, theta)


@dataclass
class SupersolutionReport:
    ok: bool
    minimum: float
    argmin: object
    residuals: dict
    excluded: list
    case1_max_error: float

    def __bool__(self) -> bool:
        return self.ok


def verify_supersolution(m: ModifiedGraph, pair: SchrodingerPair, *, tol: float = PASS_TOL) -> SupersolutionReport:
    """Evaluate ``(Delta + u) phi`` at every vertex with a complete neighbourhood.

    Boundary vertices of the truncation are excluded and listed.  Also reports
    the largest deviation ``|Delta phi - C1 phi|`` over subdivision points.
    """
    g = m.graph
    residuals = {}
    excluded = []
    case1 = 0.0
    C1 = pair.constants.C1
    for x in g.sorted_vertices:
        if x in g.boundary:
            excluded.append(x)
            continue
        lap = formal_laplacian(g, pair.phi, x)
        residuals[x] = lap + pair.u[x] * pair.phi[x]
        if isinstance(x, Sub):
            case1 = max(case1, abs(lap - C1 * pair.phi[x]))
    if residuals:
        argmin = min(residuals, key=residuals.get)
        minimum = residuals[argmin]
    else:
        argmin, minimum = None, math.inf
    return SupersolutionReport(minimum >= -tol, minimum, argmin, residuals, excluded, case1)
