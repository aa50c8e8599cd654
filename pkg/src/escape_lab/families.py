"""Example families of infinite weighted graphs and their tabulated asymptotics.

Each family is an infinite graph given by a neighbour oracle.  ``Family.graph``
materializes the truncation at ``spec.truncation`` generation levels; the last
level forms the truncation boundary.  All two-sided ``asymp`` relations of the
family definitions are taken with constant exactly one and ``c(x) = 1``.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, replace
from functools import cached_property

from .asymptotics import AsymptoticClass, RateForm, VolumeClass
from .errors import AssumptionViolated, Overflow, UnclassifiedRegime, UnknownVertex
from .graph import AdaptedWeight, WeightedGraph, default_adapted_weight

__all__ = [
    "FamilySpec",
    "Family",
    "BirthDeath",
    "AntiTree",
    "Tree",
    "Lattice",
    "make_family",
    "make_birth_death",
    "make_anti_tree",
    "make_tree",
    "make_lattice",
    "classify_family",
    "KINDS",
]

KINDS = ("birth_death", "anti_tree", "tree", "lattice")
DEFAULT_MAX_VERTICES = 2_000_000
DEFAULT_MAX_EDGES = 5_000_000


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    d: int = 1
    truncation: int = 10
    max_vertices: int = DEFAULT_MAX_VERTICES
    max_edges: int = DEFAULT_MAX_EDGES
    # birth-death only: what to do where mu(n) > 2 w(n, n+1)
    on_violation: str = "raise"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("alpha, beta, gamma must be nonnegative")
        if self.d < 1:
            raise ValueError("lattice dimension must be >= 1")
        if self.on_violation not in ("raise", "clamp"):
            raise ValueError("on_violation must be 'raise' or 'clamp'")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "d": self.d,
            "truncation": self.truncation,
            "on_violation": self.on_violation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        fields = {k: data[k] for k in ("kind", "alpha", "beta", "gamma", "d", "truncation", "on_violation") if k in data}
        return cls(**fields)


class Family:
    """Base class: lazy infinite graph plus a cached materialized truncation."""

    root = 0

    def __init__(self, spec: FamilySpec):
        self.spec = spec

    def __repr__(self) -> str:
        s = self.spec
        return f"{type(self).__name__}(alpha={s.alpha}, beta={s.beta}, gamma={s.gamma}, d={s.d}, truncation={s.truncation})"

    # oracle interface -------------------------------------------------
    def level(self, v) -> int:
        raise NotImplementedError

    def neighbors(self, v) -> dict:
        raise NotImplementedError

    def mu(self, v) -> float:
        return 1.0

    def degree(self, v) -> float:
        return math.fsum(self.neighbors(v).values()) / self.mu(v)

    def sigma_edge(self, x, y) -> float:
        return min(1.0, 1.0 / math.sqrt(self.degree(x)), 1.0 / math.sqrt(self.degree(y)))

    def count_up_to(self, level: int) -> tuple[int, int]:
        """Number of vertices and edges with both ends at level <= ``level``."""
        raise NotImplementedError

    def vertices_up_to(self, level: int):
        raise NotImplementedError

    # materialization --------------------------------------------------
    def extend(self, truncation: int) -> "Family":
        return type(self)(replace(self.spec, truncation=truncation))

    def _materialize(self) -> tuple[WeightedGraph, AdaptedWeight]:
        T = self.spec.truncation
        nv, ne = self.count_up_to(T)
        if nv > self.spec.max_vertices or ne > self.spec.max_edges:
            raise Overflow(
                f"{type(self).__name__} truncation {T} needs {nv} vertices / {ne} edges "
                f"(caps {self.spec.max_vertices} / {self.spec.max_edges})"
            )
        adj = {}
        mu = {}
        boundary = []
        for v in self.vertices_up_to(T):
            lv = self.level(v)
            adj[v] = {y: w for y, w in self.neighbors(v).items() if self.level(y) <= T}
            mu[v] = self.mu(v)
            if lv == T:
                boundary.append(v)
        g = WeightedGraph(adj, mu, boundary)
        sigma = self._sigma(g)
        return g, sigma

    def _sigma(self, g: WeightedGraph) -> AdaptedWeight:
        return default_adapted_weight(g, degree=self.degree)

    @cached_property
    def _materialized(self):
        return self._materialize()

    @property
    def graph(self) -> WeightedGraph:
        return self._materialized[0]

    @property
    def sigma(self) -> AdaptedWeight:
        return self._materialized[1]

    def classify(self) -> AsymptoticClass:
        return classify_family(self.spec)


class BirthDeath(Family):
    """Nearest-neighbour chain on Z_+ with ``w(n, n+1) = (n+1)^2 log(n+2)^b loglog(n+3)^g / 2``."""

    def w(self, n: int) -> float:
        s = self.spec
        return 0.5 * (n + 1) ** 2 * math.log(n + 2) ** s.beta * math.log(math.log(n + 3)) ** s.gamma

    def level(self, v) -> int:
        if not isinstance(v, int) or v < 0:
            raise UnknownVertex(f"{v!r} is not a vertex of Z_+")
        return v

    def neighbors(self, v) -> dict:
        self.level(v)
        nb = {v + 1: self.w(v)}
        if v > 0:
            nb[v - 1] = self.w(v - 1)
        return nb

    def sigma_edge(self, x, y) -> float:
        n = min(x, y)
        ratio = self.mu(n) / (2.0 * self.w(n))
        if ratio > 1.0:
            if self.spec.on_violation == "raise":
                raise AssumptionViolated(
                    f"mu({n}) = {self.mu(n)} > 2 w({n},{n + 1}) = {2 * self.w(n)}"
                )
            return 1.0
        return math.sqrt(ratio)

    def count_up_to(self, level):
        return level + 1, level

    def vertices_up_to(self, level):
        return range(level + 1)

    def _sigma(self, g):
        return AdaptedWeight.symmetric({(x, y): self.sigma_edge(x, y) for x, y, _ in g.edges()})


class AntiTree(Family):
    """Layers ``S_n``; all of ``S_n`` is joined to all of ``S_{n+1}``.

    ``|S_0| = 1`` and ``|S_{n+1}| = floor((n+2)^alpha log(n+3)^beta)``.
    """

    def __init__(self, spec):
        super().__init__(spec)
        self._offsets = [0, 1]

    def layer_size(self, n: int) -> int:
        if n == 0:
            return 1
        s = self.spec
        return max(1, math.floor((n + 1) ** s.alpha * math.log(n + 2) ** s.beta))

    def _offset(self, n: int) -> int:
        while len(self._offsets) <= n:
            k = len(self._offsets) - 1
            self._offsets.append(self._offsets[-1] + self.layer_size(k))
        return self._offsets[n]

    def layer(self, n: int) -> range:
        return range(self._offset(n), self._offset(n + 1))

    def level(self, v) -> int:
        if not isinstance(v, int) or v < 0:
            raise UnknownVertex(f"{v!r} is not an anti-tree vertex")
        while self._offset(len(self._offsets) - 1) <= v:
            self._offset(len(self._offsets))
        return bisect.bisect_right(self._offsets, v) - 1

    def neighbors(self, v) -> dict:
        n = self.level(v)
        nb = dict.fromkeys(self.layer(n + 1), 1.0)
        if n > 0:
            nb.update(dict.fromkeys(self.layer(n - 1), 1.0))
        return nb

    def degree(self, v) -> float:
        n = self.level(v)
        return float(self.layer_size(n + 1) + (self.layer_size(n - 1) if n > 0 else 0))

    def count_up_to(self, level):
        nv = self._offset(level + 1)
        ne = sum(self.layer_size(k) * self.layer_size(k + 1) for k in range(level))
        return nv, ne

    def vertices_up_to(self, level):
        return range(self._offset(level + 1))


class Tree(Family):
    """Rooted tree; a vertex at depth ``n`` has ``floor((n+2)^alpha log(n+3)^beta)`` children."""

    def __init__(self, spec):
        super().__init__(spec)
        self._offsets = [0, 1]

    def branching(self, n: int) -> int:
        s = self.spec
        return max(1, math.floor((n + 2) ** s.alpha * math.log(n + 3) ** s.beta))

    def _offset(self, n: int) -> int:
        while len(self._offsets) <= n:
            k = len(self._offsets) - 2
            size = self._offsets[-1] - self._offsets[-2]
            self._offsets.append(self._offsets[-1] + size * self.branching(k))
            if self._offsets[-1] > 10 * self.spec.max_vertices:
                raise Overflow(f"tree depth {k + 1} exceeds {10 * self.spec.max_vertices} vertices")
        return self._offsets[n]

    def level(self, v) -> int:
        if not isinstance(v, int) or v < 0:
            raise UnknownVertex(f"{v!r} is not a tree vertex")
        n = 0
        while self._offset(n + 1) <= v:
            n += 1
        return n

    def neighbors(self, v) -> dict:
        n = self.level(v)
        i = v - self._offset(n)
        b = self.branching(n)
        first = self._offset(n + 1) + i * b
        nb = dict.fromkeys(range(first, first + b), 1.0)
        if n > 0:
            parent = self._offset(n - 1) + i // self.branching(n - 1)
            nb[parent] = 1.0
        return nb

    def degree(self, v) -> float:
        n = self.level(v)
        return float(self.branching(n) + (1 if n > 0 else 0))

    def count_up_to(self, level):
        nv = self._offset(level + 1)
        return nv, nv - 1

    def vertices_up_to(self, level):
        return range(self._offset(level + 1))


class Lattice(Family):
    """``Z^d`` with ``w(x, y) = (m+2)^alpha log(m+3)^beta``, ``m = min(|x|_1, |y|_1)``.

    For ``d = 1`` vertex ids are the integer coordinates themselves; for
    ``d >= 2`` they index points ordered by ``(|x|_1, x)``.
    """

    def __init__(self, spec):
        super().__init__(spec)
        self._coords = None
        self._ids = None

    def edge_weight(self, m: int) -> float:
        s = self.spec
        return (m + 2) ** s.alpha * math.log(m + 3) ** s.beta

    def _ensure_index(self, level):
        if self.spec.d == 1:
            return
        if self._coords is not None and self._index_level >= level:
            return
        d = self.spec.d
        pts = [p for p in itertools.product(range(-level, level + 1), repeat=d) if sum(map(abs, p)) <= level]
        pts.sort(key=lambda p: (sum(map(abs, p)), p))
        self._coords = pts
        self._ids = {p: i for i, p in enumerate(pts)}
        self._index_level = level

    def coords(self, v) -> tuple:
        if self.spec.d == 1:
            if not isinstance(v, int):
                raise UnknownVertex(f"{v!r} is not a lattice vertex")
            return (v,)
        self._ensure_index(self.spec.truncation + 1)
        try:
            return self._coords[v]
        except (IndexError, TypeError):
            raise UnknownVertex(f"{v!r} is not a materialized lattice vertex") from None

    def vertex(self, point) -> int:
        point = tuple(point)
        if self.spec.d == 1:
            return point[0]
        self._ensure_index(max(self.spec.truncation + 1, sum(map(abs, point))))
        return self._ids[point]

    def level(self, v) -> int:
        return sum(map(abs, self.coords(v)))

    def _neighbor_points(self, p):
        for i in range(len(p)):
            for step in (-1, 1):
                q = list(p)
                q[i] += step
                yield tuple(q)

    def neighbors(self, v) -> dict:
        p = self.coords(v)
        n = sum(map(abs, p))
        nb = {}
        for q in self._neighbor_points(p):
            m = min(n, sum(map(abs, q)))
            nb[self.vertex(q)] = self.edge_weight(m)
        return nb

    def degree(self, v) -> float:
        p = self.coords(v)
        n = sum(map(abs, p))
        return math.fsum(self.edge_weight(min(n, sum(map(abs, q)))) for q in self._neighbor_points(p))

    def count_up_to(self, level):
        d = self.spec.d
        # points of the l1 ball in Z^d
        nv = sum(2**k * math.comb(d, k) * math.comb(level, k) for k in range(d + 1))
        return nv, d * nv

    def vertices_up_to(self, level):
        if self.spec.d == 1:
            return sorted(range(-level, level + 1), key=lambda x: (abs(x), x))
        self._ensure_index(level + 1)
        return [i for i, p in enumerate(self._coords) if sum(map(abs, p)) <= level]


_CLASSES = {"birth_death": BirthDeath, "anti_tree": AntiTree, "tree": Tree, "lattice": Lattice}


def make_family(spec: FamilySpec) -> Family:
    fam = _CLASSES[spec.kind](spec)
    if spec.kind == "birth_death" and spec.on_violation == "raise":
        # fail fast on the adaptedness assumption over the truncation
        for n in range(spec.truncation):
            fam.sigma_edge(n, n + 1)
    return fam


def make_birth_death(spec: FamilySpec) -> BirthDeath:
    if spec.kind != "birth_death":
        raise ValueError("spec.kind must be 'birth_death'")
    return make_family(spec)


def make_anti_tree(spec: FamilySpec) -> AntiTree:
    if spec.kind != "anti_tree":
        raise ValueError("spec.kind must be 'anti_tree'")
    return make_family(spec)


def make_tree(spec: FamilySpec) -> Tree:
    if spec.kind != "tree":
        raise ValueError("spec.kind must be 'tree'")
    return make_family(spec)


def make_lattice(spec: FamilySpec) -> Lattice:
    if spec.kind != "lattice":
        raise ValueError("spec.kind must be 'lattice'")
    return make_family(spec)


# ---------------------------------------------------------------------------
# tabulated classifications


def _log_growth(a: float, b: float = 0.0) -> VolumeClass:
    """``log mu(B(r)) ~ r^a (log r)^b``."""
    if a == 2 and b == 0:
        return VolumeClass("gaussian")
    if a == 2 and b == 1:
        return VolumeClass("gaussian_log")
    return VolumeClass("stretched_exp", a, b)


def _power_rate(p: float, q: float = 0.0) -> RateForm:
    return RateForm("power_log", p, q)


def _exp_rate(p: float) -> RateForm:
    return RateForm("exp") if p == 1 else RateForm("exp_power", p)


def _classify_layered(alpha, beta, D) -> tuple[VolumeClass, str, RateForm | None]:
    """Shared table of the anti-tree and lattice families."""
    if alpha < 2:
        vol = VolumeClass("polynomial", D)
    elif alpha == 2 and beta < 2:
        vol = _log_growth(2 / (2 - beta))
    elif alpha == 2 and beta == 2:
        vol = VolumeClass("super_gaussian", 1.0)
    else:
        return VolumeClass("infinite"), "outside-theorem", None
    if alpha < 2:
        return vol, "yes", RateForm("sqrt_t_log_t")
    if beta < 1:
        return vol, "yes", _power_rate((2 - beta) / (2 - 2 * beta))
    if beta == 1:
        return vol, "yes", RateForm("exp")
    return vol, "no", None


def classify_family(spec: FamilySpec) -> AsymptoticClass:
    """Published volume class, conservativeness verdict and rate form."""
    a, b, g = spec.alpha, spec.beta, spec.gamma
    if min(a, b, g) < 0:
        raise UnclassifiedRegime("negative parameters are not tabulated")

    if spec.kind == "birth_death":
        if b < 2:
            vol = _log_growth(2 / (2 - b), g / (2 - b))
        elif b == 2 and g < 2:
            vol = VolumeClass("super_gaussian", 2 / (2 - g))
        elif b == 2 and g == 2:
            vol = VolumeClass("super_gaussian", 1.0, nested=2)
        else:
            return AsymptoticClass(VolumeClass("infinite"), "outside-theorem", notes=("sup d_sigma < inf",))
        if b < 1:
            return AsymptoticClass(vol, "yes", _power_rate((2 - b) / (2 - 2 * b), g / (2 - 2 * b)))
        if b == 1 and g < 1:
            return AsymptoticClass(vol, "yes", _exp_rate(1 / (1 - g)))
        if b == 1 and g == 1:
            return AsymptoticClass(vol, "yes", RateForm("exp_exp"))
        return AsymptoticClass(vol, "no", notes=("theorem sharp for birth-death chains: not conservative",))

    if spec.kind == "anti_tree":
        D = 2 * (a + 1) / (2 - a) if a < 2 else None
        vol, verdict, rate = _classify_layered(a, b, D)
        notes = ()
        if verdict == "no":
            notes = ("theorem sharp for anti-trees: not conservative",)
        elif verdict == "outside-theorem":
            notes = ("sup d_sigma < inf",)
        return AsymptoticClass(vol, verdict, rate, notes=notes)

    if spec.kind == "lattice":
        D = 2 * spec.d / (2 - a) if a < 2 else None
        vol, verdict, rate = _classify_layered(a, b, D)
        if verdict == "no":
            verdict = "outside-theorem"
        notes = ("sup d_sigma < inf",) if vol.kind == "infinite" else ()
        return AsymptoticClass(vol, verdict, rate, sharp=None, notes=notes)

    if spec.kind == "tree":
        notes = ["theorem not sharp for trees"]
        if a <= 1 and math.floor(2**a * math.log(3) ** b) <= 1:
            notes.append("with c = 1 the root has a single child; small parameters generate a ray")
        if a < 2:
            vol = _log_growth(2 / (2 - a), 1 + b / (2 - a))
        elif a == 2 and b < 2:
            vol = VolumeClass("super_gaussian", 2 / (2 - b))
        elif a == 2 and b == 2:
            vol = VolumeClass("super_gaussian", 1.0, nested=2)
        else:
            return AsymptoticClass(VolumeClass("infinite"), "outside-theorem", sharp=False, notes=tuple(notes))
        if a < 1:
            rate = _power_rate((2 - a) / (2 - 2 * a), (2 - a + b) / (2 - 2 * a))
            return AsymptoticClass(vol, "yes", rate, sharp=False, notes=tuple(notes))
        if a == 1 and b == 0:
            return AsymptoticClass(vol, "yes", RateForm("exp"), sharp=False, notes=tuple(notes))
        if a == 1 and b <= 1:
            notes.append("conservative by the radial criterion for spherically symmetric trees, not covered by the volume test")
            return AsymptoticClass(vol, "outside-theorem", sharp=False, notes=tuple(notes))
        if a == 1:
            notes.append("not conservative by the radial criterion for spherically symmetric trees")
            return AsymptoticClass(vol, "no", sharp=False, notes=tuple(notes))
        return AsymptoticClass(vol, "outside-theorem", sharp=False, notes=tuple(notes))

    raise UnclassifiedRegime(f"unknown family {spec.kind!r}")
