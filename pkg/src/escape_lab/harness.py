"""Monte Carlo experiments: escape envelopes, trace law, occupation and explosion."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import RateForm
from .ctmc.simulate import (
    local_time_curve,
    simulate_trajectory,
    state_at,
    stream_rng,
    subset_mask,
    time_change,
    worker_count,
    DEFAULT_STALL_TOL,
)
from .errors import TruncationTooSmall
from .families import FamilySpec, classify_family, make_family
from .graph import WeightedGraph, shortest_path_metric
from .modify import ModifiedGraph, modify_region, subdivide, uniform_plan
from .rate import RateFunction, volume_profile
from .schrodinger import occupation_floor, schrodinger_constants

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "run_escape_experiment",
    "run_trace_experiment",
    "run_occupation_experiment",
    "run_explosion_experiment",
    "exceedance_curve",
    "critical_constant",
    "tv_distance",
    "tv_noise_bound",
    "min_occupation_ratio",
]

KINDS = ("escape", "trace", "occupation", "explosion")
CENSOR_LIMIT = 0.10
MODIFIED_STREAM_OFFSET = 1 << 40
CONTROL_STREAM_OFFSET = 2 << 40
BOOTSTRAP_STREAM = (1 << 62) + 7


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    family: dict | None = None
    graph_file: str | None = None
    center: int = 0
    n_trajectories: int = 1000
    horizon: float = 100.0
    jump_budget: int = 10**6
    seed: int = 0
    # escape
    c_grid: tuple = tuple(np.round(np.arange(0.25, 10.001, 0.25), 2).tolist())
    r_hat: float = 32.0
    rate_tag: str | None = None  # closed-form tag; default from the family classification
    t_burn: float = 10.0
    # trace / occupation
    subdivision: int | str = 2  # uniform count or "design"
    design_radius: float = 2.9
    checkpoints: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    t_scale: float = 1.0
    corrupt: str | None = None  # negative control: "mu_original" or "mu_vertex:<v>"
    identity: bool = False
    epsilon: float = 0.2
    n_bootstrap: int = 200
    # explosion
    budgets: tuple | None = None
    stall_tol: float = DEFAULT_STALL_TOL
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if (self.family is None) == (self.graph_file is None):
            raise ValueError("give exactly one of family / graph_file")
        for name in ("c_grid", "checkpoints", "budgets"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(v))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k != "output"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=list).encode()).hexdigest()


@dataclass
class ExperimentReport:
    kind: str
    config: ExperimentConfig
    summary: dict
    rows: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def rows_csv(self) -> str:
        return _csv(self.rows)

    def series_csv(self, name: str) -> str:
        return _csv(self.series[name])

    def manifest(self) -> str:
        data = {
            "kind": self.kind,
            "config": {k: v for k, v in self.config.to_dict().items() if k != "output"},
            "config_sha256": self.config.digest(),
            "code_version": __version__,
            "summary": self.summary,
            "series": sorted(self.series),
        }
        return json.dumps(data, indent=1, sort_keys=True, default=_json_default) + "\n"

    def write(self, outdir) -> Path:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(self.rows_csv())
        for name in sorted(self.series):
            (out / f"series_{name}.csv").write_text(self.series_csv(name))
        (out / "manifest.json").write_text(self.manifest())
        (out / "provenance.json").write_text(json.dumps(self.provenance, indent=1, sort_keys=True) + "\n")
        return out


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(type(o))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def _csv(rows: list) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    return buf.getvalue()


def _fan_out(fn, items, workers=None) -> list:
    items = list(items)
    nw = worker_count(workers)
    if nw == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# graph loading


def _family_graph(config: ExperimentConfig):
    if config.family is not None:
        spec = FamilySpec.from_dict(config.family)
        fam = make_family(spec)
        return fam.graph, fam.sigma, spec
    from .io import load_graph

    gf = load_graph(config.graph_file)
    return gf.graph, gf.sigma, None


def _modified(g, sigma, config: ExperimentConfig) -> ModifiedGraph:
    if config.subdivision == "design":
        return modify_region(g, sigma, config.center, config.design_radius)
    return subdivide(g, sigma, uniform_plan(g, int(config.subdivision)))


def _check_censoring(n_censored: int, n: int, what: str):
    if n and n_censored / n > CENSOR_LIMIT:
        raise TruncationTooSmall(f"{n_censored}/{n} {what} trajectories left the truncation; enlarge it")


# ---------------------------------------------------------------------------
# escape


_POWER_TAG = re.compile(r"c\*t(?:\^([0-9.eE+-]+))?(?:\*log\(t\)\^([0-9.eE+-]+))?")
_EXP_POWER_TAG = re.compile(r"exp\(c\*t\^([0-9.eE+-]+)\)")


def _rate_form(tag: str) -> RateForm:
    """Parse a closed-form tag as printed by ``RateForm.tag``."""
    fixed = {"c*sqrt(t*log(t))": "sqrt_t_log_t", "exp(c*t)": "exp", "exp(exp(c*t))": "exp_exp"}
    if tag in fixed:
        return RateForm(fixed[tag])
    m = _POWER_TAG.fullmatch(tag)
    if m:
        return RateForm("power_log", float(m.group(1) or 1.0), float(m.group(2) or 0.0))
    m = _EXP_POWER_TAG.fullmatch(tag)
    if m:
        return RateForm("exp_power", float(m.group(1)))
    raise ValueError(f"unknown rate tag {tag!r}")


def critical_constant(form: RateForm, d: np.ndarray, s: np.ndarray) -> float:
    """Smallest ``c`` with ``d <= R_c(s)`` at every sample (``R_c`` the form with constant ``c``)."""
    d = np.asarray(d, dtype=float)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if form.kind in ("sqrt_t_log_t", "power_log"):
            ratio = d / form(s, 1.0)
        elif form.kind == "exp":
            ratio = np.log(d) / s
        elif form.kind == "exp_power":
            ratio = np.log(d) / s**form.power
        elif form.kind == "exp_exp":
            ratio = np.where(d > 1, np.log(np.log(np.maximum(d, 1.0))) / s, -np.inf)
        else:
            raise ValueError(form.kind)
    ratio = np.where(d > 0, ratio, 0.0)
    return float(np.max(ratio, initial=0.0))


def exceedance_curve(c_star: np.ndarray, c_grid) -> list:
    """Fraction of paths whose critical constant exceeds each ``c``; monotone in ``c`` by construction."""
    c_star = np.asarray(c_star, dtype=float)
    n = len(c_star)
    out = []
    for c in c_grid:
        p = float(np.mean(c_star > c)) if n else float("nan")
        out.append({"c": float(c), "exceedance": p, "stderr": math.sqrt(p * (1 - p) / n) if n else float("nan")})
    return out


def _burn_segments(traj, t_burn: float):
    """Holding intervals meeting ``[t_burn, end]`` with their earliest time in that window."""
    ends = np.append(traj.times[1:], traj.end_time)
    sel = ends > t_burn
    start = np.maximum(traj.times[sel], t_burn)
    return traj.states[sel], start


def run_escape_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Distance to the center against candidate envelopes ``R_c(t)``.

    For each path and each envelope family the critical constant ``c*`` is
    the smallest ``c`` keeping every post-burn-in distance under ``R_c``;
    the exceedance at ``c`` is the fraction of paths with ``c* > c``.
    """
    t0 = time.time()
    g, sigma, spec = _family_graph(config)
    metric = shortest_path_metric(g, sigma, config.center)
    csr = g.csr
    dist = np.array([metric.distances.get(v, math.inf) for v in csr.order])
    tag = config.rate_tag
    if tag is None:
        if spec is None:
            raise ValueError("rate_tag is required for graph files")
        cls = make_family(spec).classify()
        if cls.rate_form is None:
            raise ValueError(f"{spec.kind} regime has no closed-form rate")
        form = cls.rate_form
    else:
        form = _rate_form(tag)
    profile = volume_profile(g, sigma, config.center)
    rate = RateFunction(profile, 1.0, config.r_hat)
    # psi at each vertex distance (nan below R_hat, inf beyond the table)
    psi_v = np.full(len(dist), np.nan)
    inside = (dist >= config.r_hat) & (dist <= rate.hi)
    if np.any(inside):
        psi_v[inside] = rate.psi(dist[inside])
    psi_v[dist > rate.hi] = np.inf

    def one(i):
        tr = simulate_trajectory(g, config.center, config.horizon, config.jump_budget, config.seed, stream=i,
                                 stall_tol=config.stall_tol)
        states, s = _burn_segments(tr, config.t_burn)
        d = dist[states]
        c_closed = critical_constant(form, d, s)
        pv = psi_v[states]
        sel = ~np.isnan(pv)
        c_psi = float(np.max(pv[sel] / s[sel], initial=0.0))
        return {
            "stream": i,
            "status": tr.status,
            "n_jumps": tr.n_jumps,
            "end_time": tr.end_time,
            "max_distance": float(np.max(dist[tr.states])),
            "c_star_closed": c_closed,
            "c_star_psi": c_psi,
        }

    rows = _fan_out(one, range(config.n_trajectories))
    ok = [r for r in rows if r["status"] == "HorizonReached"]
    censored = len(rows) - len(ok)
    _check_censoring(censored, len(rows), "escape")
    closed = exceedance_curve([r["c_star_closed"] for r in ok], config.c_grid)
    via_psi = exceedance_curve([r["c_star_psi"] for r in ok], config.c_grid)

    def first_below(curve, level=0.01):
        hits = [p["c"] for p in curve if p["exceedance"] <= level]
        return hits[0] if hits else None

    summary = {
        "rate_form": form.tag,
        "n_used": len(ok),
        "n_censored": censored,
        "t_burn": config.t_burn,
        "psi_table_max_t": rate.t_max,
        "min_c_exceedance_le_1pct_closed": first_below(closed),
        "min_c_exceedance_le_1pct_psi": first_below(via_psi),
        "monotone_closed": _nonincreasing([p["exceedance"] for p in closed]),
        "monotone_psi": _nonincreasing([p["exceedance"] for p in via_psi]),
    }
    return ExperimentReport("escape", config, summary, rows, {"exceedance_closed": closed, "exceedance_psi": via_psi},
                            _provenance(t0))


def _nonincreasing(values) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def _provenance(t0: float) -> dict:
    return {"started_unix": t0, "elapsed_s": time.time() - t0, "code_version": __version__}


# ---------------------------------------------------------------------------
# trace law


def tv_distance(a: dict, b: dict) -> float:
    """Half the L1 distance between two count tables (normalized separately)."""
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return 0.5 * math.fsum(abs(a.get(k, 0) / na - b.get(k, 0) / nb) for k in keys)


def tv_noise_bound(a: dict, b: dict, k: float = 3.0) -> float:
    """Expected TV of two independent samples of one law plus ``k`` standard deviations.

    Uses the pooled frequencies ``p`` and ``E|p1 - p2| ~ sqrt(2 p (1-p) (1/n1 + 1/n2) / pi)``
    per state; the TV of two samples moves by at most ``1/n`` when one draw
    changes, so its standard deviation is at most ``1/sqrt(min(n1, n2))``.
    """
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    mean = 0.0
    for key in keys:
        p = (a.get(key, 0) + b.get(key, 0)) / (na + nb)
        mean += math.sqrt(2.0 * p * (1 - p) * (1 / na + 1 / nb) / math.pi)
    return 0.5 * mean + k / math.sqrt(min(na, nb))


def _bootstrap_tv(a: dict, b: dict, n_boot: int, rng) -> tuple[float, float]:
    keys = sorted(set(a) | set(b), key=str)
    pa = np.array([a.get(k, 0) for k in keys], dtype=float)
    pb = np.array([b.get(k, 0) for k in keys], dtype=float)
    na, nb = int(pa.sum()), int(pb.sum())
    ra = rng.multinomial(na, pa / na, size=n_boot) / na
    rb = rng.multinomial(nb, pb / nb, size=n_boot) / nb
    tv = 0.5 * np.abs(ra - rb).sum(axis=1)
    lo, hi = np.percentile(tv, [2.5, 97.5])
    return float(lo), float(hi)


def _corrupt(m: ModifiedGraph, how: str) -> WeightedGraph:
    """Negative control: the modified graph with ``mu`` doubled where ``how`` says.

    ``"mu_original"`` doubles it on every original vertex, ``"mu_vertex:<v>"``
    on the single original vertex ``v``.
    """
    g = m.graph
    if how == "mu_original":
        hit = m.is_original
    elif how.startswith("mu_vertex:"):
        target = int(how.split(":", 1)[1])
        g.check(target)
        hit = lambda v: v == target
    else:
        raise ValueError(f"unknown corruption {how!r}")
    order = g.sorted_vertices
    mu = {v: 2.0 * g.mu(v) if hit(v) else g.mu(v) for v in order}
    return WeightedGraph({v: dict(g.neighbors(v)) for v in order}, mu, g.boundary)


def run_trace_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Law of the original chain against the trace of the subdivided chain on the original vertices.

    The subdivided chain runs until it has spent the largest checkpoint time
    on original vertices; its trace is read off at each checkpoint.  With
    ``identity`` the original chain is compared with an independent copy of
    itself.
    """
    t0 = time.time()
    g, sigma, _ = _family_graph(config)
    ts = [c * config.t_scale for c in config.checkpoints]
    t_max = max(ts)
    x0 = config.center

    def original(i):
        tr = simulate_trajectory(g, x0, t_max, config.jump_budget, config.seed, stream=i, stall_tol=config.stall_tol)
        if tr.status != "HorizonReached":
            return None
        return [state_at(tr, t) for t in ts]

    states_a = _fan_out(original, range(config.n_trajectories))
    if config.identity:
        states_b = _fan_out(original, range(CONTROL_STREAM_OFFSET, CONTROL_STREAM_OFFSET + config.n_trajectories))
        label_b = "original-copy"
    else:
        m = _modified(g, sigma, config)
        mg = m.graph
        if config.corrupt is not None:
            mg = _corrupt(m, config.corrupt)
        vo = subset_mask(mg.csr.order, m.is_original)
        limit = t_max * (1 + 1e-9) + 1e-12

        def modified(i):
            tr = simulate_trajectory(mg, x0, math.inf, config.jump_budget, config.seed, stream=MODIFIED_STREAM_OFFSET + i,
                                     occupation_subset=vo, occupation_limit=limit)
            if tr.status != "OccupationReached":
                return None
            trace = time_change(tr, vo)
            return [state_at(trace, t) for t in ts]

        states_b = _fan_out(modified, range(config.n_trajectories))
        label_b = "trace-of-modified" + (f" ({config.corrupt})" if config.corrupt else "")

    cens_a = sum(s is None for s in states_a)
    cens_b = sum(s is None for s in states_b)
    _check_censoring(max(cens_a, cens_b), config.n_trajectories, "trace")
    rng = stream_rng(config.seed, BOOTSTRAP_STREAM)
    rows = []
    per_t = []
    for j, t in enumerate(ts):
        ca, cb = {}, {}
        for s in states_a:
            if s is not None:
                ca[s[j]] = ca.get(s[j], 0) + 1
        for s in states_b:
            if s is not None:
                cb[s[j]] = cb.get(s[j], 0) + 1
        tv = tv_distance(ca, cb)
        bound = tv_noise_bound(ca, cb)
        lo, hi = _bootstrap_tv(ca, cb, config.n_bootstrap, rng)
        per_t.append({"t": t, "tv": tv, "bound_3sigma": bound, "ci_low": lo, "ci_high": hi,
                      "support": len(set(ca) | set(cb)), "below_bound": tv <= bound})
        for key in sorted(set(ca) | set(cb), key=lambda v: (isinstance(v, tuple), v)):
            rows.append({"t": t, "vertex": key, "count_original": ca.get(key, 0), "count_compare": cb.get(key, 0)})
    summary = {
        "compare": label_b,
        "n_censored_original": cens_a,
        "n_censored_compare": cens_b,
        "max_tv": max(p["tv"] for p in per_t),
        "all_below_bound": all(p["below_bound"] for p in per_t),
        "per_checkpoint": per_t,
    }
    return ExperimentReport("trace", config, summary, rows, {"tv": per_t}, _provenance(t0))


# ---------------------------------------------------------------------------
# occupation


def min_occupation_ratio(times: np.ndarray, A: np.ndarray, t_lo: float, t_hi: float) -> float:
    """Exact ``min A_t / t`` over ``[t_lo, t_hi]`` for a piecewise-linear clock with slopes 0 or 1.

    On a slope-0 piece the ratio decreases and on a slope-1 piece it
    increases, so the minimum sits at a breakpoint or an end of the window.
    """
    if t_lo <= 0:
        raise ValueError("t_lo must be positive")
    pts = np.concatenate([[t_lo], times[(times > t_lo) & (times < t_hi)], [t_hi]])
    vals = np.interp(pts, times, A)
    return float(np.min(vals / pts))


def run_occupation_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Minimum over ``t`` in ``[t_burn, horizon]`` of the fraction of time spent on original vertices."""
    t0 = time.time()
    g, sigma, _ = _family_graph(config)
    if config.subdivision in (1, "1", "none"):
        mg = g
        vo = np.ones(len(g.csr.order), dtype=np.bool_)
    else:
        m = _modified(g, sigma, config)
        mg = m.graph
        vo = subset_mask(mg.csr.order, m.is_original)

    def one(i):
        tr = simulate_trajectory(mg, config.center, config.horizon, config.jump_budget, config.seed, stream=i,
                                 stall_tol=config.stall_tol)
        if tr.status != "HorizonReached":
            return {"stream": i, "status": tr.status, "min_ratio": float("nan"), "final_ratio": float("nan")}
        times, A = local_time_curve(tr, vo)
        return {
            "stream": i,
            "status": tr.status,
            "min_ratio": min_occupation_ratio(times, A, config.t_burn, config.horizon),
            "final_ratio": float(A[-1] / config.horizon),
        }

    rows = _fan_out(one, range(config.n_trajectories))
    ok = np.array([r["min_ratio"] for r in rows if r["status"] == "HorizonReached"])
    _check_censoring(len(rows) - len(ok), len(rows), "occupation")
    q = np.percentile(ok, [1, 5, 50]) if len(ok) else [float("nan")] * 3
    consts = schrodinger_constants()
    summary = {
        "n_used": int(len(ok)),
        "min_ratio": float(ok.min()) if len(ok) else float("nan"),
        "q01": float(q[0]),
        "q05": float(q[1]),
        "median": float(q[2]),
        "max_ratio": float(ok.max()) if len(ok) else float("nan"),
        "epsilon": config.epsilon,
        "pass": bool(len(ok) and q[0] > config.epsilon),
        "reference_floor": occupation_floor(consts),
        "tau_over_t_ceiling": float(1.0 / ok.min()) if len(ok) and ok.min() > 0 else float("inf"),
    }
    grid = np.linspace(0.0, 1.0, 101)
    series = {"min_ratio_cdf": [{"ratio": float(x), "fraction_below": float(np.mean(ok <= x))} for x in grid]}
    return ExperimentReport("occupation", config, summary, rows, series, _provenance(t0))


# ---------------------------------------------------------------------------
# explosion


def _status_at_budget(tr, b: int, horizon: float, stall_tol: float) -> str:
    if tr.n_jumps < b or (tr.n_jumps == b and tr.status == "LeftTruncation"):
        return "BudgetExhausted" if tr.status == "Exploded" else tr.status
    t_b = tr.time_at_jump(b)
    t_q = tr.time_at_jump(b - b // 4)
    return "Exploded" if t_b - t_q < stall_tol * horizon else "BudgetExhausted"


def run_explosion_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Explosion frequency under the stall detector, at nested jump budgets from one seeded run.

    A path counts as exploded at budget ``b`` once the stall rule fired at
    any nested budget up to ``b``, so the frequency is nondecreasing in the
    budget on a fixed set of seeds.
    """
    t0 = time.time()
    spec = None
    if config.family is not None:
        spec = FamilySpec.from_dict(config.family)
        if spec.kind == "birth_death":
            # sigma is not used by the simulation; tolerate regimes outside mu <= 2w
            spec = replace(spec, on_violation="clamp")
        g = make_family(spec).graph
    else:
        g, _, _ = _family_graph(config)
    B = config.jump_budget
    budgets = sorted(set(config.budgets or (B // 4, B // 2, B)))
    if budgets[-1] != B:
        raise ValueError("largest budget must equal jump_budget")
    cps = sorted({b for b in budgets} | {b - b // 4 for b in budgets})

    def one(i):
        tr = simulate_trajectory(g, config.center, config.horizon, B, config.seed, stream=i, record=False,
                                 checkpoints=cps, stall_tol=config.stall_tol)
        row = {"stream": i, "status": tr.status, "n_jumps": tr.n_jumps, "end_time": tr.end_time}
        # detection is cumulative: a stall seen by budget b stays detected at larger budgets
        seen = False
        for b in budgets:
            st = _status_at_budget(tr, b, config.horizon, config.stall_tol)
            seen = seen or st == "Exploded"
            row[f"status_{b}"] = "Exploded" if seen else st
        return row

    rows = _fan_out(one, range(config.n_trajectories))
    n = len(rows)
    freq = {}
    for b in budgets:
        k = sum(r[f"status_{b}"] == "Exploded" for r in rows)
        freq[b] = k / n
    verdict = classify_family(spec).conservative if spec is not None else None
    f_top = freq[B]
    summary = {
        "explosion_frequency": f_top,
        "stderr": math.sqrt(f_top * (1 - f_top) / n),
        "frequency_by_budget": {str(b): freq[b] for b in budgets},
        "budget_monotone": _nonincreasing([-freq[b] for b in budgets]),
        "mean_jumps": float(np.mean([r["n_jumps"] for r in rows])),
        "mean_elapsed": float(np.mean([r["end_time"] for r in rows])),
        "n_left_truncation": sum(r["status"] == "LeftTruncation" for r in rows),
        "classified_conservative": verdict,
        "stall_tol": config.stall_tol,
    }
    series = {"frequency_by_budget": [{"budget": b, "frequency": freq[b]} for b in budgets]}
    return ExperimentReport("explosion", config, summary, rows, series, _provenance(t0))


_RUNNERS = {
    "escape": run_escape_experiment,
    "trace": run_trace_experiment,
    "occupation": run_occupation_experiment,
    "explosion": run_explosion_experiment,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    report = _RUNNERS[config.kind](config)
    if config.output:
        report.write(config.output)
    return report
