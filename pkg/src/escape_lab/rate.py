"""Volume profiles, the escape-rate integral psi and its inverse.

``psi(R) = c * int_{R_hat}^{R} r dr / (log V(r) + log log r)`` where ``V(r)`` is
the measure of the closed ball of radius ``r``.  For a graph, ``V`` is a step
function; the integral is computed piece by piece between its jumps with
adaptive Gauss-Legendre panels, then cumulated into a table that makes both
``psi`` and ``psi^{-1}`` cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .asymptotics import RateForm, VolumeClass
from .errors import DomainError, OutOfRange, TruncationTooSmall, UnclassifiedRegime
from .graph import BALL_SLACK, shortest_path_metric

__all__ = [
    "VolumeProfile",
    "SyntheticProfile",
    "RateFunction",
    "ConservativenessReport",
    "volume_profile",
    "psi",
    "psi_inverse",
    "conservativeness_test",
    "corollary_rate",
    "integrate",
    "DEFAULT_C",
    "DEFAULT_R_HAT",
    "PROVABLE_C",
]

DEFAULT_C = 1.0
DEFAULT_R_HAT = 32.0
# constant obtained by the proof; reference only
PROVABLE_C = 1.0 / (8192.0 * math.e**4)
LOGLOG_FLOOR = math.e + 0.01

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _gl(f: Callable, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    return half * (f(x) @ _GL_W)


def integrate(f: Callable, knots, rtol: float = 1e-12, atol: float = 1e-300, max_rounds: int = 60) -> np.ndarray:
    """Integrals of the vectorized ``f`` over each interval ``[knots[i], knots[i+1]]``.

    Every interval is bisected until one 12-point Gauss-Legendre panel agrees
    with the sum over its two halves.  ``f`` only has to be smooth inside each
    interval, so jumps of a step profile belong in ``knots``.
    """
    knots = np.asarray(knots, dtype=float)
    n = len(knots) - 1
    out = np.zeros(max(n, 0))
    if n <= 0:
        return out
    owner = np.arange(n)
    a, b = knots[:-1].copy(), knots[1:].copy()
    keep = b > a
    owner, a, b = owner[keep], a[keep], b[keep]
    whole = _gl(f, a, b)
    for _ in range(max_rounds):
        if len(a) == 0:
            break
        m = 0.5 * (a + b)
        left, right = _gl(f, a, m), _gl(f, m, b)
        fine = left + right
        done = np.abs(fine - whole) <= rtol * np.abs(fine) + atol
        np.add.at(out, owner[done], fine[done])
        todo = ~done
        owner = np.concatenate([owner[todo], owner[todo]])
        a, b = np.concatenate([a[todo], m[todo]]), np.concatenate([m[todo], b[todo]])
        whole = np.concatenate([left[todo], right[todo]])
    else:
        np.add.at(out, owner, whole)
    return out


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class VolumeProfile:
    """Step function ``r -> mu(B(center, r))`` measured on a graph.

    ``radii`` are the distinct vertex distances (sorted, starting at 0) and
    ``volumes[i]`` is the ball measure on ``[radii[i], radii[i+1])``.
    """

    center: object
    radii: np.ndarray
    volumes: np.ndarray
    certified_radius: float

    def volume(self, r):
        r = np.asarray(r, dtype=float)
        self._guard(r)
        i = np.searchsorted(self.radii, r + BALL_SLACK, side="right") - 1
        return np.where(i >= 0, self.volumes[np.maximum(i, 0)], 0.0)

    def log_volume(self, r):
        with np.errstate(divide="ignore"):
            return np.log(self.volume(r))

    def denominator(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.log_volume(r) + np.log(np.log(r))

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        inner = self.radii[(self.radii > lo) & (self.radii < hi)]
        return np.concatenate([[lo], inner, [hi]])

    def samples(self, r_grid) -> list[tuple[float, float]]:
        r_grid = np.sort(np.asarray(r_grid, dtype=float))
        return list(zip(r_grid.tolist(), self.volume(r_grid).tolist()))

    @property
    def max_radius(self) -> float:
        return float(min(self.certified_radius, self.radii[-1] if math.isinf(self.certified_radius) else math.inf))

    def _guard(self, r):
        if np.any(r > self.certified_radius + BALL_SLACK):
            raise TruncationTooSmall(
                f"radius {float(np.max(r))} beyond certified radius {self.certified_radius}"
            )


@dataclass(frozen=True)
class SyntheticProfile:
    """Profile given by formulas instead of a graph.

    Supply ``log_volume(r)``; alternatively ``denominator(r)`` replaces the
    whole ``log V(r) + log log r`` term.  Both must accept numpy arrays.
    """

    log_volume_fn: Callable | None = None
    denominator_fn: Callable | None = None
    certified_radius: float = math.inf
    center: object = None

    def log_volume(self, r):
        r = np.asarray(r, dtype=float)
        self._guard(r)
        if self.log_volume_fn is None:
            with np.errstate(invalid="ignore", divide="ignore"):
                return self.denominator_fn(r) - np.log(np.log(r))
        return self.log_volume_fn(r)

    def volume(self, r):
        return np.exp(self.log_volume(r))

    def denominator(self, r):
        r = np.asarray(r, dtype=float)
        self._guard(r)
        if self.denominator_fn is not None:
            return self.denominator_fn(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.log_volume_fn(r) + np.log(np.log(r))

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        if hi <= lo:
            return np.array([lo, hi])
        n = int(min(4000, 64 + 16 * math.log2(hi / lo + 1)))
        return np.unique(np.concatenate([np.geomspace(lo, hi, n), np.linspace(lo, hi, 64)]))

    @property
    def max_radius(self) -> float:
        return self.certified_radius

    def _guard(self, r):
        if np.any(r > self.certified_radius):
            raise TruncationTooSmall(f"radius {float(np.max(r))} beyond {self.certified_radius}")


def volume_profile(g, sigma, center, r_grid=None, *, r_max: float | None = None) -> VolumeProfile:
    """Measure ``mu(B(center, r))`` on the materialized graph.

    ``r_max`` (or ``max(r_grid)``) must not exceed the certified radius of the
    truncation.  Without either, the profile covers the certified range.
    """
    if r_grid is not None and len(r_grid):
        want = float(np.max(r_grid))
        r_max = want if r_max is None else max(r_max, want)
    metric = shortest_path_metric(g, sigma, center, math.inf if r_max is None else r_max + BALL_SLACK)
    cert = metric.certified_radius
    if r_max is not None and r_max > cert:
        raise TruncationTooSmall(f"profile radius {r_max} exceeds certified radius {cert}")
    items = sorted(metric.distances.items(), key=lambda kv: kv[1])
    d = np.array([v for _, v in items])
    m = np.array([g.mu(x) for x, _ in items])
    limit = cert if r_max is None else r_max
    sel = d <= limit + BALL_SLACK
    d, m = d[sel], m[sel]
    radii, start = np.unique(d, return_index=True)
    cum = np.cumsum(m)
    ends = np.append(start[1:], len(d)) - 1
    return VolumeProfile(center, radii, cum[ends], float(limit))


# ---------------------------------------------------------------------------
# psi and its inverse


def _lower_limit(r_hat: float) -> float:
    if not r_hat > 0:
        raise DomainError(f"R_hat must be positive, got {r_hat}")
    return max(r_hat, LOGLOG_FLOOR)


class RateFunction:
    """Tabulated ``psi`` on ``[R_hat, R_max]`` with its inverse.

    The table stores ``psi`` at every knot (profile jump or panel edge), so
    evaluation needs one partial panel and inversion is a bisection over the
    table followed by a bracketed root find inside one piece.
    """

    def __init__(self, profile, c: float = DEFAULT_C, r_hat: float = DEFAULT_R_HAT, r_max: float | None = None):
        if not c > 0:
            raise DomainError("c must be positive")
        self.profile = profile
        self.c = float(c)
        self.r_hat = float(r_hat)
        self.lo = _lower_limit(r_hat)
        hi = profile.max_radius if r_max is None else float(r_max)
        if math.isinf(hi):
            raise DomainError("an unbounded synthetic profile needs r_max")
        if hi > profile.max_radius + BALL_SLACK:
            raise TruncationTooSmall(f"r_max {hi} beyond certified radius {profile.max_radius}")
        if hi < self.lo:
            raise TruncationTooSmall(f"certified range {hi} ends below the lower limit {self.lo}")
        if not profile.denominator(self.lo) > 0:
            raise DomainError(f"log V + log log r is not positive at r = {self.lo}")
        self.hi = hi
        self.knots = profile.breakpoints(self.lo, hi)
        pieces = integrate(self._integrand, self.knots)
        self.table = np.concatenate([[0.0], np.cumsum(pieces)])

    def _integrand(self, r):
        return r / self.profile.denominator(r)

    def _piece(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # integral over [a, b] lying inside one knot interval
        out = np.zeros(len(a))
        for i in np.flatnonzero(b > a):
            out[i] = integrate(self._integrand, [a[i], b[i]])[0]
        return out

    def psi(self, R):
        R = np.asarray(R, dtype=float)
        scalar = R.ndim == 0
        R = np.atleast_1d(R)
        if np.any(R < self.r_hat):
            raise DomainError("psi is defined for R >= R_hat")
        if np.any(R > self.hi + BALL_SLACK):
            raise TruncationTooSmall(f"R = {float(R.max())} beyond the table range {self.hi}")
        Rc = np.clip(R, self.lo, self.hi)
        i = np.clip(np.searchsorted(self.knots, Rc, side="right") - 1, 0, len(self.knots) - 2)
        val = self.c * (self.table[i] + self._piece(self.knots[i], Rc))
        return float(val[0]) if scalar else val

    __call__ = psi

    @property
    def t_max(self) -> float:
        return self.c * float(self.table[-1])

    def psi_inverse(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < 0):
            raise OutOfRange("t must be nonnegative")
        if np.any(t > self.t_max * (1 + 1e-15)):
            raise OutOfRange(f"t = {float(t.max())} exceeds psi(R_max) = {self.t_max}; extend the truncation")
        out = np.empty(len(t))
        scaled = t / self.c
        for j, s in enumerate(scaled):
            if s <= 0:
                out[j] = self.lo
                continue
            i = min(int(np.searchsorted(self.table, s, side="left")), len(self.table) - 1)
            a, b = self.knots[i - 1], self.knots[i]
            base = self.table[i - 1]
            if self.table[i] - s <= 0:
                out[j] = b
                continue
            g = lambda r: base + integrate(self._integrand, [a, r])[0] - s
            out[j] = brentq(g, a, b, xtol=1e-14 * max(1.0, b), rtol=1e-15)
        return float(out[0]) if scalar else out

    def table_points(self) -> tuple[np.ndarray, np.ndarray]:
        return self.knots.copy(), self.c * self.table


def psi(profile, c: float, r_hat: float, R) -> float:
    """``psi(R)`` for one call; build a ``RateFunction`` to reuse the table."""
    R_arr = np.asarray(R, dtype=float)
    if np.any(R_arr < r_hat):
        raise DomainError("psi is defined for R >= R_hat")
    r_max = float(np.max(R_arr))
    if r_max < _lower_limit(r_hat):
        _lower_limit(r_hat)
        return 0.0 if R_arr.ndim == 0 else np.zeros_like(R_arr)
    return RateFunction(profile, c, r_hat, r_max).psi(R)


def psi_inverse(rate: RateFunction, t):
    return rate.psi_inverse(t)


# ---------------------------------------------------------------------------
# conservativeness integral test


@dataclass(frozen=True)
class ConservativenessReport:
    verdict: str  # "consistent-with-divergence" | "consistent-with-convergence" | "outside-theorem"
    partial_integral: float
    r_range: tuple[float, float]
    fitted_power: float
    fit_residual: float

    @property
    def diverges(self) -> bool:
        return self.verdict == "consistent-with-divergence"

    @property
    def outside_theorem(self) -> bool:
        return self.verdict == "outside-theorem"


def conservativeness_test(profile, r_max: float | None = None, n_fit: int = 200) -> ConservativenessReport:
    """Partial integral of ``r / log V(r)`` and the integrand's fitted power of ``r``.

    A fitted power ``>= -1`` is reported as consistent with divergence, else
    with convergence; no claim is made about the untested tail.  A certified
    range ending below ``LOGLOG_FLOOR`` (the volume saturates at a finite
    radius, as on anti-trees of bounded intrinsic diameter) carries no tail
    to fit and is reported as ``outside-theorem``.
    """
    hi = profile.max_radius if r_max is None else r_max
    if math.isinf(hi):
        raise DomainError("an unbounded synthetic profile needs r_max")
    if hi > profile.max_radius + BALL_SLACK:
        raise TruncationTooSmall(f"r_max {hi} beyond certified radius {profile.max_radius}")
    # start where log V is positive
    if isinstance(profile, VolumeProfile):
        pos = profile.radii[profile.volumes > 1.0]
        lo = float(pos[0]) if len(pos) else hi
    else:
        grid = np.geomspace(1e-6, hi, 2000)
        lv = profile.log_volume(grid)
        lo = float(grid[np.argmax(lv > 0)]) if np.any(lv > 0) else hi
    lo = max(lo, 1e-6)
    if not hi > lo:
        raise TruncationTooSmall("certified range does not reach a ball of measure > 1")

    def f(r):
        return r / profile.log_volume(r)

    partial = float(np.sum(integrate(f, profile.breakpoints(lo, hi))))
    if hi < LOGLOG_FLOOR:
        return ConservativenessReport("outside-theorem", partial, (lo, hi), math.nan, math.nan)
    rs = np.linspace(max(lo, hi / 2), hi, n_fit)
    y = np.log(f(rs))
    A = np.vstack([np.log(rs), np.ones_like(rs)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(res[0] / n_fit)) if len(res) else 0.0
    power = float(coef[0])
    verdict = "consistent-with-divergence" if power >= -1 else "consistent-with-convergence"
    return ConservativenessReport(verdict, partial, (lo, hi), power, resid)


# ---------------------------------------------------------------------------
# closed-form rates


def corollary_rate(volume_class: VolumeClass) -> RateForm:
    """Closed-form upper rate function for the four tabulated volume classes."""
    k = volume_class.kind
    if k == "polynomial":
        return RateForm("sqrt_t_log_t")
    if k == "stretched_exp" and volume_class.log_power == 0:
        a = volume_class.exponent
        if 0 < a < 2:
            return RateForm("power_log", 1.0 / (2.0 - a))
        if a == 2:
            return RateForm("exp")
    if k == "gaussian":
        return RateForm("exp")
    if k == "gaussian_log":
        return RateForm("exp_exp")
    raise UnclassifiedRegime(f"no closed-form rate for volume class {volume_class}")
