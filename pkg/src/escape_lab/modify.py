"""Edge subdivision of a weighted graph and the design of subdivision counts.

Each original edge ``e = (x, y)`` with count ``n = n(e)`` is replaced by a
path ``x = x_0, x_1, ..., x_n = y`` whose interior points are ``Sub(x, y, k)``
(with ``(x, y)`` oriented by ``vertex_key``).  Sub-edges get conductance
``n * w_o(e)`` and length ``sigma_o(e) / n``; interior points get measure
``2 w_o(e) sigma_o(e)^2 / n``.  Original vertices keep their measure, so the
chain watched only on the original vertices is the original chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PlanIncomplete, PlanTooSmall, TruncationTooSmall
from .graph import (
    DIST_ATOL,
    AdaptedWeight,
    Sub,
    WeightedGraph,
    oriented,
    shortest_path_metric,
)
from .rate import VolumeProfile, volume_profile

__all__ = [
    "SubdivisionPlan",
    "SubdivisionDesign",
    "ModifiedGraph",
    "GeometryReport",
    "subdivide",
    "uniform_plan",
    "design_subdivision",
    "modify_region",
    "schedule_radius",
    "level_for_distance",
    "required_count",
    "verify_modification_geometry",
    "verify_plan_inequality",
    "verify_shrinking",
]


def schedule_radius(n: int) -> float:
    """``R_n = 2^(n+4)``."""
    return float(2 ** (n + 4))


def level_for_distance(D: float) -> int | None:
    """Largest ``n >= 0`` with ``2^(n+2) - 1 <= D``; ``None`` when ``D < 3``."""
    if D < 3:
        return None
    n = int(math.floor(math.log2(D + 1))) - 2
    # guard against log2 rounding at exact powers of two
    while 2 ** (n + 3) - 1 <= D:
        n += 1
    while n >= 0 and 2 ** (n + 2) - 1 > D:
        n -= 1
    return n


def required_count(f_R: float, R: float) -> float:
    """Lower bound ``f(R) + 2 + log log R`` on the subdivision count."""
    return f_R + 2.0 + math.log(math.log(R))


@dataclass(frozen=True)
class SubdivisionDesign:
    """Record of how a plan was derived from ball volumes around ``center``."""

    center: object
    c_o: float
    profile: VolumeProfile
    r_max: float
    levels: dict = field(default_factory=dict)  # edge -> n* (None below distance 3)

    def f(self, r: float) -> float:
        return float(np.log(self.profile.volume(r))) - math.log(self.c_o)

    def sigma_level(self, n: int) -> float:
        R = schedule_radius(n)
        return 1.0 / required_count(self.f(R), R)


@dataclass(frozen=True)
class SubdivisionPlan:
    """Subdivision count per original edge, keyed by the oriented edge."""

    counts: dict
    design: SubdivisionDesign | None = None

    def __post_init__(self):
        clean = {}
        for (x, y), n in self.counts.items():
            e = oriented(x, y)
            if e in clean and clean[e] != n:
                raise ValueError(f"conflicting counts for edge {e!r}")
            clean[e] = int(n)
        object.__setattr__(self, "counts", clean)

    def __getitem__(self, edge) -> int:
        return self.counts[oriented(*edge)]

    def get(self, x, y, default=None):
        return self.counts.get(oriented(x, y), default)

    def __len__(self) -> int:
        return len(self.counts)

    def items(self):
        return self.counts.items()

    @property
    def min_count(self) -> int:
        return min(self.counts.values())


def uniform_plan(g_o: WeightedGraph, n: int) -> SubdivisionPlan:
    return SubdivisionPlan({(x, y): n for x, y, _ in g_o.edges()})


@dataclass(frozen=True)
class ModifiedGraph:
    graph: WeightedGraph
    sigma: AdaptedWeight
    original: WeightedGraph
    sigma_o: AdaptedWeight
    plan: SubdivisionPlan

    @property
    def original_vertices(self):
        return self.original.vertices

    def is_original(self, v) -> bool:
        return not isinstance(v, Sub)

    def sub_path(self, x, y) -> list:
        """Vertices ``x_0, ..., x_n`` along the subdivided edge, from ``x`` to ``y``."""
        u, v = oriented(x, y)
        n = self.plan[(u, v)]
        path = [u] + [Sub(u, v, k) for k in range(1, n)] + [v]
        return path if u == x else path[::-1]


def subdivide(g_o: WeightedGraph, sigma_o: AdaptedWeight, plan: SubdivisionPlan) -> ModifiedGraph:
    adj = {x: {} for x in g_o.vertices}
    mu = dict(g_o.measure)
    sigma = {}
    for x, y, w_o in g_o.edges():
        n = plan.get(x, y)
        if n is None:
            raise PlanIncomplete(f"plan has no count for edge ({x!r}, {y!r})")
        if n < 2:
            raise PlanTooSmall(f"count {n} < 2 on edge ({x!r}, {y!r})")
        s_o = sigma_o(x, y)
        w = n * w_o
        s = s_o / n
        m = 2.0 * w_o * s_o * s_o / n
        path = [x] + [Sub(x, y, k) for k in range(1, n)] + [y]
        for k in range(1, n):
            adj[path[k]] = {}
            mu[path[k]] = m
        for a, b in zip(path, path[1:]):
            adj[a][b] = w
            adj[b][a] = w
            sigma[(a, b)] = s
            sigma[(b, a)] = s
    extra = set(plan.counts) - {oriented(x, y) for x, y, _ in g_o.edges()}
    if extra:
        raise ValueError(f"plan names {len(extra)} edges absent from the graph")
    g = WeightedGraph(adj, mu, g_o.boundary)
    return ModifiedGraph(g, AdaptedWeight(sigma), g_o, sigma_o, plan)


def design_subdivision(g_o: WeightedGraph, sigma_o: AdaptedWeight, center, r_max: float) -> SubdivisionPlan:
    """Minimal integer counts meeting the growth condition on every edge.

    Covers every edge whose endpoints both lie within ``r_max`` of ``center``.
    An edge whose farther endpoint sits at distance ``D >= 3`` falls in level
    ``n* = max{n : 2^(n+2) - 1 <= D}`` and gets
    ``max(2, ceil(f(R_n*) + 2 + log log R_n*))``; nearer edges get 2.  The
    measure floor ``C_o`` is the minimum of ``mu`` over the materialized graph.
    """
    metric = shortest_path_metric(g_o, sigma_o, center, r_max + DIST_ATOL)
    dist = metric.distances
    if r_max > metric.certified_radius:
        raise TruncationTooSmall(f"r_max {r_max} beyond certified radius {metric.certified_radius}")
    region = {v for v, d in dist.items() if d <= r_max + DIST_ATOL}
    edges = [(x, y) for x, y, _ in g_o.edges() if x in region and y in region]
    top = level_for_distance(max((max(dist[x], dist[y]) for x, y in edges), default=0.0))
    profile_radius = schedule_radius(top) if top is not None else 0.0
    try:
        profile = volume_profile(g_o, sigma_o, center, r_max=profile_radius)
    except TruncationTooSmall as exc:
        raise TruncationTooSmall(f"level {top} needs the ball of radius R = {profile_radius}: {exc}") from None
    c_o = min(g_o.measure.values())
    design = SubdivisionDesign(center, c_o, profile, r_max)
    counts = {}
    for x, y in edges:
        n_star = level_for_distance(max(dist[x], dist[y]))
        design.levels[oriented(x, y)] = n_star
        if n_star is None:
            counts[(x, y)] = 2
            continue
        R = schedule_radius(n_star)
        counts[(x, y)] = max(2, math.ceil(required_count(design.f(R), R)))
    return SubdivisionPlan(counts, design)


def modify_region(g_o: WeightedGraph, sigma_o: AdaptedWeight, center, r_max: float) -> ModifiedGraph:
    """Design a plan around ``center`` and subdivide the ball of radius ``r_max``.

    Vertices of the ball that lose neighbours join the boundary, so later
    checks skip them.
    """
    plan = design_subdivision(g_o, sigma_o, center, r_max)
    keep = {v for e in plan.counts for v in e} | {center}
    sub = g_o.induced(keep)
    sigma = AdaptedWeight({(x, y): s for (x, y), s in sigma_o.items() if x in keep and y in keep})
    return subdivide(sub, sigma, plan)


# ---------------------------------------------------------------------------
# verification


@dataclass
class GeometryReport:
    ok: bool
    max_distance_error: float = 0.0
    distance_violations: list = field(default_factory=list)
    volume_violations: list = field(default_factory=list)
    pairs_checked: int = 0
    radii_checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def verify_modification_geometry(m: ModifiedGraph, center, radii, sources=None, *, atol: float = DIST_ATOL) -> GeometryReport:
    """Distances on original vertices agree; ball measures are sandwiched.

    Checks ``|d(x, y) - d_o(x, y)| <= atol`` for every original ``y`` and each
    source ``x`` (default: every original vertex), and
    ``mu_o(B_o(r)) <= mu(B(r)) <= 3 mu_o(B_o(r))`` at each radius.
    """
    rep = GeometryReport(True)
    if sources is None:
        sources = m.original.sorted_vertices
    for x in sources:
        d_new = shortest_path_metric(m.graph, m.sigma, x)
        d_old = shortest_path_metric(m.original, m.sigma_o, x)
        for y, d in d_old.distances.items():
            # only certified distances are comparable on a truncation
            if d > d_old.certified_radius or d > d_new.certified_radius:
                continue
            err = abs(d_new[y] - d)
            rep.pairs_checked += 1
            rep.max_distance_error = max(rep.max_distance_error, err)
            if err > atol:
                rep.ok = False
                rep.distance_violations.append((x, y, d, d_new[y]))
    radii = sorted(radii)
    if radii:
        r_top = radii[-1]
        met_new = shortest_path_metric(m.graph, m.sigma, center, r_top + 1)
        met_old = shortest_path_metric(m.original, m.sigma_o, center, r_top + 1)
        cert = min(met_new.certified_radius, met_old.certified_radius)
        if r_top > cert:
            raise TruncationTooSmall(f"radius {r_top} beyond certified radius {cert}")
        for r in radii:
            v_new = sum(m.graph.mu(y) for y, d in met_new.distances.items() if d <= r + 1e-12)
            v_old = sum(m.original.mu(y) for y, d in met_old.distances.items() if d <= r + 1e-12)
            rep.radii_checked += 1
            if not (v_old <= v_new * (1 + 1e-12) and v_new <= 3 * v_old * (1 + 1e-12)):
                rep.ok = False
                rep.volume_violations.append((r, v_old, v_new))
    return rep


def verify_plan_inequality(g_o: WeightedGraph, sigma_o: AdaptedWeight, plan: SubdivisionPlan) -> list:
    """Edges violating ``n(e) >= f(R_n) + 2 + log log R_n`` for some level met.

    Every level ``n`` with ``2^(n+2) - 1 <= D`` is checked, not only the top one.
    """
    design = plan.design
    if design is None:
        raise ValueError("plan carries no design record")
    dist = shortest_path_metric(g_o, sigma_o, design.center, design.r_max + DIST_ATOL).distances
    bad = []
    for (x, y), count in plan.items():
        D = max(dist[x], dist[y])
        top = level_for_distance(D)
        for n in range(0 if top is None else top + 1):
            R = schedule_radius(n)
            if count < required_count(design.f(R), R):
                bad.append(((x, y), n, count))
    return bad


def verify_shrinking(m: ModifiedGraph) -> list:
    """Sub-edges with an endpoint at distance ``>= 2^(n+2)`` must have ``sigma <= sigma_n``."""
    design = m.plan.design
    if design is None:
        raise ValueError("plan carries no design record")
    metric = shortest_path_metric(m.graph, m.sigma, design.center)
    dist = metric.distances
    bad = []
    for a, b, _ in m.graph.edges():
        far = max(dist.get(a, math.inf), dist.get(b, math.inf))
        if math.isinf(far) or far < 4:
            continue
        n = int(math.floor(math.log2(far))) - 2
        while n >= 0 and 2 ** (n + 2) > far:
            n -= 1
        if schedule_radius(n) > design.profile.certified_radius:
            continue
        s = m.sigma(a, b)
        limit = design.sigma_level(n)
        if s > limit * (1 + 1e-12):
            bad.append(((a, b), n, s, limit))
    return bad
