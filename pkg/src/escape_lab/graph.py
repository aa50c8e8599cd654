"""Weighted graphs, adapted weights and the adapted path metric.

A graph here is always a finite, materialized object.  Infinite families are
handled by materializing a truncation and remembering which vertices sit on
its *boundary* (their neighbour sets are incomplete).  Every metric query
carries a certified radius: distances up to that radius agree with the
distances in the untruncated graph.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import count
from typing import Callable, Hashable, Iterable, Iterator, Mapping, NamedTuple, Union

import numpy as np

from .errors import (
    Disconnected,
    DuplicateEdge,
    MissingEdgeWeight,
    MissingValue,
    NonPositiveMeasure,
    NonPositiveWeight,
    SelfLoop,
    TruncationTooSmall,
    UnknownVertex,
)

__all__ = [
    "Sub",
    "VertexId",
    "vertex_key",
    "oriented",
    "WeightedGraph",
    "AdaptedWeight",
    "PathMetric",
    "AdaptednessReport",
    "build_graph",
    "weighted_degree",
    "default_adapted_weight",
    "verify_adapted",
    "shortest_path_metric",
    "ball_and_volume",
    "formal_laplacian",
    "DIST_ATOL",
    "BALL_SLACK",
]

DIST_ATOL = 1e-9
BALL_SLACK = 1e-12
ADAPTED_SLACK = 1e-12


class Sub(NamedTuple):
    """Interior point number ``k`` on the subdivided original edge ``(u, v)``.

    The edge is stored oriented (``vertex_key(u) < vertex_key(v)``) and
    ``1 <= k <= n(e) - 1``; ``k`` counts from ``u``.
    """

    u: int
    v: int
    k: int


VertexId = Union[int, Sub]


def vertex_key(v: Hashable) -> tuple:
    """Total order over vertex ids: originals first, then subdivision points."""
    if isinstance(v, Sub):
        return (1, v.u, v.v, v.k)
    return (0, v, 0, 0)


def oriented(x, y) -> tuple:
    return (x, y) if vertex_key(x) <= vertex_key(y) else (y, x)


class WeightedGraph:
    """Immutable simple weighted graph ``(V, w, mu)``.

    ``adj[x][y]`` is the conductance ``w(x, y)``; ``boundary`` lists the
    vertices of a truncation whose neighbour set is incomplete.
    """

    def __init__(self, adj: Mapping, mu: Mapping, boundary: Iterable = ()):
        self._adj = adj
        self._mu = mu
        self.boundary = frozenset(boundary)

    def __contains__(self, x) -> bool:
        return x in self._mu

    def __len__(self) -> int:
        return len(self._mu)

    def __iter__(self) -> Iterator:
        return iter(self._mu)

    def __repr__(self) -> str:
        return f"WeightedGraph(|V|={len(self)}, |E|={self.n_edges}, boundary={len(self.boundary)})"

    @property
    def vertices(self):
        return self._mu.keys()

    @cached_property
    def sorted_vertices(self) -> list:
        return sorted(self._mu, key=vertex_key)

    @cached_property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self._adj.values()) // 2

    def check(self, x) -> None:
        if x not in self._mu:
            raise UnknownVertex(f"vertex {x!r} is not in the graph")

    def neighbors(self, x) -> Mapping:
        self.check(x)
        return self._adj[x]

    def w(self, x, y) -> float:
        return self._adj[x].get(y, 0.0)

    def mu(self, x) -> float:
        self.check(x)
        return self._mu[x]

    @property
    def measure(self) -> Mapping:
        return self._mu

    def edges(self) -> Iterator[tuple]:
        """Each undirected edge once, oriented, as ``(x, y, w)``."""
        for x in self.sorted_vertices:
            kx = vertex_key(x)
            for y, wxy in self._adj[x].items():
                if kx < vertex_key(y):
                    yield x, y, wxy

    def is_interior(self, x) -> bool:
        return x not in self.boundary

    def total_measure(self, vertices: Iterable | None = None) -> float:
        if vertices is None:
            return math.fsum(self._mu.values())
        return math.fsum(self._mu[v] for v in vertices)

    def induced(self, keep: Iterable) -> "WeightedGraph":
        """Induced subgraph; vertices that lose neighbours join the boundary."""
        keep = set(keep)
        adj = {}
        boundary = set(v for v in self.boundary if v in keep)
        for x in keep:
            self.check(x)
            nb = {y: wxy for y, wxy in self._adj[x].items() if y in keep}
            if len(nb) != len(self._adj[x]):
                boundary.add(x)
            adj[x] = nb
        return WeightedGraph(adj, {x: self._mu[x] for x in keep}, boundary)

    @cached_property
    def csr(self) -> "CSR":
        return CSR.from_graph(self)


@dataclass(frozen=True)
class CSR:
    """Array view of a graph used by the compiled simulation kernels."""

    order: list
    index: dict
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    cumweights: np.ndarray
    mu: np.ndarray
    rate: np.ndarray
    boundary: np.ndarray

    @classmethod
    def from_graph(cls, g: WeightedGraph) -> "CSR":
        order = g.sorted_vertices
        index = {v: i for i, v in enumerate(order)}
        n = len(order)
        indptr = np.zeros(n + 1, dtype=np.int64)
        for i, v in enumerate(order):
            indptr[i + 1] = indptr[i] + len(g._adj[v])
        indices = np.empty(indptr[-1], dtype=np.int64)
        weights = np.empty(indptr[-1], dtype=np.float64)
        cum = np.empty(indptr[-1], dtype=np.float64)
        for i, v in enumerate(order):
            nbrs = sorted(g._adj[v].items(), key=lambda kv: vertex_key(kv[0]))
            s = 0.0
            for j, (y, wxy) in enumerate(nbrs):
                p = indptr[i] + j
                indices[p] = index[y]
                weights[p] = wxy
                s += wxy
                cum[p] = s
        mu = np.array([g._mu[v] for v in order], dtype=np.float64)
        total = np.array([cum[indptr[i + 1] - 1] if indptr[i + 1] > indptr[i] else 0.0 for i in range(n)])
        boundary = np.array([v in g.boundary for v in order], dtype=np.bool_)
        return cls(order, index, indptr, indices, weights, cum, mu, total / mu, boundary)


class AdaptedWeight:
    """Edge lengths ``sigma``; stored per directed pair so asymmetry is detectable."""

    __slots__ = ("_s",)

    def __init__(self, values: Mapping[tuple, float]):
        self._s = dict(values)

    @classmethod
    def symmetric(cls, values: Mapping[tuple, float] | Iterable[tuple]) -> "AdaptedWeight":
        items = values.items() if isinstance(values, Mapping) else ((e[:2], e[2]) for e in values)
        s = {}
        for (x, y), val in items:
            s[(x, y)] = val
            s[(y, x)] = val
        return cls(s)

    def __call__(self, x, y) -> float:
        try:
            return self._s[(x, y)]
        except KeyError:
            raise MissingEdgeWeight(f"no sigma on edge ({x!r}, {y!r})") from None

    def get(self, x, y, default=None):
        return self._s.get((x, y), default)

    def __len__(self) -> int:
        return len(self._s)

    def items(self):
        return self._s.items()

    def edges(self) -> Iterator[tuple]:
        for (x, y), val in self._s.items():
            if vertex_key(x) < vertex_key(y):
                yield x, y, val


@dataclass(frozen=True)
class PathMetric:
    """Single-source adapted path distances.

    ``distances`` holds every vertex within the requested radius.
    ``certified_radius`` is the distance of the closest truncation-boundary
    vertex: distances not exceeding it are exact for the untruncated graph.
    """

    source: Hashable
    distances: dict
    radius: float
    certified_radius: float = math.inf

    def __getitem__(self, x) -> float:
        return self.distances[x]

    def __contains__(self, x) -> bool:
        return x in self.distances

    def get(self, x, default=None):
        return self.distances.get(x, default)


@dataclass
class AdaptednessReport:
    ok: bool
    vertex: Hashable = None
    reason: str = ""
    value: float = float("nan")
    unchecked: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def build_graph(edges: Iterable, mu: Mapping, boundary: Iterable = (), *, require_connected: bool = True) -> WeightedGraph:
    """Validate an edge list ``[(x, y, w), ...]`` and measure ``mu`` into a graph."""
    adj: dict = {v: {} for v in mu}
    for x, y, wxy in edges:
        if x == y:
            raise SelfLoop(f"self-loop at {x!r}")
        if not (wxy > 0) or not math.isfinite(wxy):
            raise NonPositiveWeight(f"w({x!r}, {y!r}) = {wxy!r} must be positive and finite")
        for v in (x, y):
            if v not in adj:
                raise NonPositiveMeasure(f"vertex {v!r} has no measure")
        if y in adj[x]:
            raise DuplicateEdge(f"edge ({x!r}, {y!r}) given twice")
        adj[x][y] = float(wxy)
        adj[y][x] = float(wxy)
    for v, m in mu.items():
        if not (m > 0) or not math.isfinite(m):
            raise NonPositiveMeasure(f"mu({v!r}) = {m!r} must be positive and finite")
    boundary = frozenset(boundary)
    for b in boundary:
        if b not in adj:
            raise UnknownVertex(f"boundary vertex {b!r} is not in the graph")
    if require_connected and adj:
        start = next(iter(adj))
        seen = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != len(adj):
            raise Disconnected(f"graph has {len(adj) - len(seen)} vertices unreachable from {start!r}")
    return WeightedGraph(adj, {v: float(m) for v, m in mu.items()}, boundary)


def weighted_degree(g: WeightedGraph, x) -> float:
    """``Deg(x) = (1/mu(x)) * sum_y w(x, y)``."""
    nb = g.neighbors(x)
    return math.fsum(nb.values()) / g.mu(x)


def default_adapted_weight(g: WeightedGraph, degree: Callable | None = None) -> AdaptedWeight:
    """``sigma(x, y) = min(Deg(x)^-1/2, Deg(y)^-1/2, 1)``.

    ``degree`` overrides the weighted degree, which families use so that
    vertices on a truncation boundary see their full neighbourhood.
    """
    deg = degree or (lambda v: weighted_degree(g, v))
    cache = {v: deg(v) for v in g.vertices}
    s = {}
    for x, y, _ in g.edges():
        val = min(1.0, 1.0 / math.sqrt(cache[x]), 1.0 / math.sqrt(cache[y]))
        s[(x, y)] = val
        s[(y, x)] = val
    return AdaptedWeight(s)


def verify_adapted(g: WeightedGraph, sigma: AdaptedWeight, *, slack: float = ADAPTED_SLACK) -> AdaptednessReport:
    """Check symmetry, ``0 < sigma <= 1`` and ``sum_y w sigma^2 / mu <= 1``.

    Boundary vertices of a truncation are listed as unchecked rather than
    tested against an incomplete neighbourhood.
    """
    unchecked = []
    for x in g.sorted_vertices:
        total = 0.0
        for y, wxy in g.neighbors(x).items():
            s_xy = sigma.get(x, y)
            s_yx = sigma.get(y, x)
            if s_xy is None or s_yx is None:
                raise MissingEdgeWeight(f"no sigma on edge ({x!r}, {y!r})")
            if s_xy != s_yx:
                return AdaptednessReport(False, x, f"asymmetric on ({x!r}, {y!r})", s_xy - s_yx, unchecked)
            if not (0.0 < s_xy <= 1.0):
                return AdaptednessReport(False, x, f"sigma({x!r}, {y!r}) outside (0, 1]", s_xy, unchecked)
            total += wxy * s_xy * s_xy
        if x in g.boundary:
            unchecked.append(x)
            continue
        total /= g.mu(x)
        if total > 1.0 + slack:
            return AdaptednessReport(False, x, "sum_y w sigma^2 / mu exceeds 1", total, unchecked)
    return AdaptednessReport(True, unchecked=unchecked)


def shortest_path_metric(g: WeightedGraph, sigma: AdaptedWeight, source, radius: float = math.inf) -> PathMetric:
    """Dijkstra over edge lengths ``sigma`` from ``source`` out to ``radius``."""
    g.check(source)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    dist = {}
    certified = math.inf
    tie = count()
    heap = [(0.0, next(tie), source)]
    best = {source: 0.0}
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in dist:
            continue
        if d > radius:
            break
        dist[x] = d
        if x in g.boundary and d < certified:
            certified = d
        for y in g.neighbors(x):
            if y in dist:
                continue
            nd = d + sigma(x, y)
            if nd < best.get(y, math.inf):
                best[y] = nd
                heapq.heappush(heap, (nd, next(tie), y))
    return PathMetric(source, dist, radius, certified)


def ball_and_volume(g: WeightedGraph, sigma: AdaptedWeight, center, r: float, metric: PathMetric | None = None) -> tuple[set, float]:
    """Closed ball ``{y : d(center, y) <= r}`` and its measure."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if metric is None or metric.source != center or metric.radius < r + BALL_SLACK:
        metric = shortest_path_metric(g, sigma, center, r + BALL_SLACK)
    if r > metric.certified_radius:
        raise TruncationTooSmall(
            f"ball radius {r} exceeds certified radius {metric.certified_radius} of the truncation"
        )
    ball = {y for y, d in metric.distances.items() if d <= r + BALL_SLACK}
    return ball, g.total_measure(ball)


def formal_laplacian(g: WeightedGraph, f: Mapping, x) -> float:
    """``(1/mu(x)) * sum_y w(x, y) (f(x) - f(y))``."""
    nb = g.neighbors(x)
    try:
        fx = f[x]
        total = math.fsum(wxy * (fx - f[y]) for y, wxy in nb.items())
    except KeyError as exc:
        raise MissingValue(f"function undefined at {exc.args[0]!r}") from None
    return total / g.mu(x)
