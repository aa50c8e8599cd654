"""Command-line interface: ``escape-lab <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ctmc.simulate import DEFAULT_STALL_TOL
from .errors import EscapeLabError
from .families import FamilySpec, KINDS as FAMILY_KINDS, make_family
from .graph import shortest_path_metric, verify_adapted
from .harness import KINDS as EXPERIMENT_KINDS, ExperimentConfig, run_experiment
from .io import load_graph, parse_label, save_graph, vertex_label
from .modify import modify_region, subdivide, uniform_plan
from .rate import DEFAULT_C, DEFAULT_R_HAT, RateFunction, volume_profile
from .schrodinger import build_schrodinger_pair, verify_supersolution

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _vertex(s: str):
    try:
        return parse_label(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad vertex {s!r}; use an integer or u~v#k") from None


def _load(path):
    if not Path(path).exists():
        raise UsageError(f"no such graph file: {path}")
    try:
        return load_graph(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: not a readable graph file ({exc})") from None


def _sigma(gf):
    if gf.sigma is None:
        raise UsageError("the graph file carries no adapted weight sigma")
    return gf.sigma


def _out(path: str | None):
    return open(path, "w", newline="") if path else contextlib.nullcontext(sys.stdout)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(a) -> int:
    spec = FamilySpec(a.family, a.alpha, a.beta, a.gamma, a.d, a.truncation, on_violation=a.on_violation)
    fam = make_family(spec)
    cls = fam.classify()
    prov = {"family": spec.to_dict(), "conservative": cls.conservative,
            "rate_form": cls.rate_form.tag if cls.rate_form else None, "code_version": __version__}
    save_graph(a.output, fam.graph, fam.sigma, prov)
    print(f"wrote {a.output}: {len(fam.graph.sorted_vertices)} vertices, conservative={cls.conservative}")
    return EXIT_OK


def cmd_modify(a) -> int:
    gf = _load(a.graph)
    sigma = _sigma(gf)
    if a.uniform is not None:
        m = subdivide(gf.graph, sigma, uniform_plan(gf.graph, a.uniform))
    else:
        if a.r_max is None:
            raise UsageError("modify needs --r-max (designed plan) or --uniform N")
        m = modify_region(gf.graph, sigma, a.center, a.r_max)
    save_graph(a.output, m.graph, provenance={"source": str(a.graph), **gf.provenance}, modified=m)
    counts = sorted(set(m.plan.counts.values()))
    print(f"wrote {a.output}: {len(m.graph.sorted_vertices)} vertices, subdivision counts {counts}")
    return EXIT_OK


def cmd_metric(a) -> int:
    gf = _load(a.graph)
    sigma = _sigma(gf)
    rep = verify_adapted(gf.graph, sigma)
    if not rep.ok:
        print(f"sigma is not adapted at {rep.vertex!r}: {rep.reason} ({rep.value!r})", file=sys.stderr)
        return EXIT_CHECK
    pm = shortest_path_metric(gf.graph, sigma, a.source, a.radius)
    with _out(a.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex", "distance"])
        for v, d in sorted(pm.distances.items(), key=lambda kv: (kv[1], vertex_label(kv[0]))):
            w.writerow([vertex_label(v), repr(float(d))])
    print(f"certified radius {pm.certified_radius!r}", file=sys.stderr)
    return EXIT_OK


def cmd_psi(a) -> int:
    gf = _load(a.graph)
    profile = volume_profile(gf.graph, _sigma(gf), a.center)
    rate = RateFunction(profile, a.c, a.r_hat)
    rows = []
    for R in a.R or []:
        rows.append(("psi", R, rate.psi(R)))
    for t in a.t or []:
        rows.append(("psi_inverse", t, rate.psi_inverse(t)))
    with _out(a.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["function", "argument", "value"])
        for r in rows:
            w.writerow([r[0], repr(float(r[1])), repr(float(r[2]))])
    print(f"table covers R <= {rate.hi!r}, t <= {rate.t_max!r}", file=sys.stderr)
    return EXIT_OK


def _summary_rows(trajs):
    yield ["stream", "status", "n_jumps", "end_time", "final_vertex"]
    for tr in trajs:
        yield [tr.stream, tr.status, tr.n_jumps, repr(tr.end_time), vertex_label(tr.final_vertex)]


def cmd_simulate(a) -> int:
    from .ctmc.simulate import simulate_batch

    path = a.graph_opt or a.graph
    if path is None:
        raise UsageError("give the graph file (positional or --graph)")
    gf = _load(path)
    trajs = simulate_batch(gf.graph, a.x0, a.horizon, a.budget, a.seed, a.n, stall_tol=a.stall_tol)
    if a.output is None:
        csv.writer(sys.stdout, lineterminator="\n").writerows(_summary_rows(trajs))
        return EXIT_OK
    out = Path(a.output)
    out.mkdir(parents=True, exist_ok=True)
    for tr in trajs:
        with open(out / f"traj_{tr.stream}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "vertex_id", "status"])
            for t, v in tr.jumps:
                w.writerow([repr(t), vertex_label(v), ""])
            # closing row: where and why the path stopped
            w.writerow([repr(tr.end_time), vertex_label(tr.final_vertex), tr.status])
    with open(out / "summary.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(_summary_rows(trajs))
    manifest = {"graph": str(path), "x0": vertex_label(a.x0), "horizon": a.horizon, "jump_budget": a.budget,
                "seed": a.seed, "streams": [tr.stream for tr in trajs], "stall_tol": a.stall_tol,
                "code_version": __version__}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"{len(trajs)} trajectories written to {out}")
    return EXIT_OK


def cmd_verify_supersolution(a) -> int:
    gf = _load(a.graph)
    if gf.modified is None:
        raise UsageError("verify-supersolution needs a modified graph (output of `escape-lab modify`)")
    pair = build_schrodinger_pair(gf.modified)
    rep = verify_supersolution(gf.modified, pair)
    phi = np.array(list(pair.phi.values()))
    print(json.dumps({"ok": rep.ok, "minimum": rep.minimum, "argmin": vertex_label(rep.argmin) if rep.argmin is not None else None,
                      "case1_max_error": rep.case1_max_error, "phi_min": float(phi.min()), "phi_max": float(phi.max()),
                      "excluded": len(rep.excluded)}, indent=1))
    return EXIT_OK if rep.ok else EXIT_CHECK


def _parse_value(s: str):
    try:
        return json.loads(s)
    except json.JSONDecodeError:
        return s


def cmd_experiment(a) -> int:
    data = {}
    if a.config:
        try:
            data = json.loads(Path(a.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {a.config}: {exc}") from None
    overrides = {
        "kind": a.kind, "graph_file": a.graph, "center": a.center, "n_trajectories": a.n, "horizon": a.horizon,
        "jump_budget": a.budget, "seed": a.seed, "rate_tag": a.rate_tag, "output": a.output,
    }
    if a.family:
        data["family"] = {"kind": a.family, **{k: v for k, v in data.get("family", {}).items() if k != "kind"}}
        data.pop("graph_file", None)
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
            if k == "graph_file":
                data.pop("family", None)
    for item in a.set or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        data[key] = _parse_value(val)
    if "output" not in data or data["output"] is None:
        raise UsageError("experiment needs --output DIR (or an output field in the config)")
    try:
        config = ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from None
    report = run_experiment(config)
    print(json.dumps(report.summary, indent=1, sort_keys=True, default=str))
    return EXIT_CHECK if _failed(report.kind, report.summary) else EXIT_OK


def _failed(kind: str, summary: dict) -> bool:
    if kind == "occupation":
        return not summary.get("pass", False)
    if kind == "escape":
        return not (summary.get("monotone_closed", True) and summary.get("monotone_psi", True))
    if kind == "explosion":
        return not summary.get("budget_monotone", True)
    return False


def cmd_report(a) -> int:
    out = Path(a.directory)
    manifest = out / "manifest.json"
    if not manifest.exists():
        raise UsageError(f"{out} holds no manifest.json; run `escape-lab experiment` first")
    data = json.loads(manifest.read_text())
    missing = [f for f in ["report.csv"] + [f"series_{s}.csv" for s in data.get("series", [])] if not (out / f).exists()]
    print(f"{data['kind']} experiment, config {data['config_sha256'][:12]}, code {data['code_version']}")
    for k, v in sorted(data["summary"].items()):
        if isinstance(v, (list, dict)):
            v = json.dumps(v, default=str)
        print(f"  {k}: {v}")
    if missing:
        print(f"missing files: {missing}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_CHECK if _failed(data["kind"], data["summary"]) else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="escape-lab", description="Escape rates and simulation of chains on weighted graphs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("generate", help="write a truncated family graph")
    g.add_argument("family", choices=FAMILY_KINDS)
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--beta", type=float, default=0.0)
    g.add_argument("--gamma", type=float, default=0.0)
    g.add_argument("--d", type=int, default=1, help="lattice dimension")
    g.add_argument("--truncation", type=int, required=True, help="generation levels to materialize")
    g.add_argument("--on-violation", choices=("raise", "clamp"), default="raise")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("modify", help="subdivide edges (designed plan around a center, or uniform)")
    m.add_argument("graph")
    m.add_argument("--center", type=_vertex, default=0)
    m.add_argument("--r-max", type=float)
    m.add_argument("--uniform", type=int, metavar="N", help="subdivide every edge into N pieces")
    m.add_argument("-o", "--output", required=True)
    m.set_defaults(func=cmd_modify)

    d = sub.add_parser("metric", help="adapted path distances from a source")
    d.add_argument("graph")
    d.add_argument("--source", type=_vertex, default=0)
    d.add_argument("--radius", type=float, default=float("inf"))
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_metric)

    s = sub.add_parser("psi", help="escape-rate integral psi and its inverse")
    s.add_argument("graph")
    s.add_argument("--center", type=_vertex, default=0)
    s.add_argument("--c", type=float, default=DEFAULT_C)
    s.add_argument("--r-hat", type=float, default=DEFAULT_R_HAT)
    s.add_argument("--R", type=float, action="append", help="evaluate psi(R); repeatable")
    s.add_argument("--t", type=float, action="append", help="evaluate psi^-1(t); repeatable")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_psi)

    r = sub.add_parser("simulate", help="simulate seeded trajectories")
    r.add_argument("graph", nargs="?")
    r.add_argument("--graph", dest="graph_opt", metavar="GRAPH", help="graph file (same as the positional)")
    r.add_argument("--x0", "--start", dest="x0", type=_vertex, default=0)
    r.add_argument("--horizon", type=float, required=True)
    r.add_argument("--budget", type=int, default=10**6)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("-n", "--n", dest="n", type=int, default=1)
    r.add_argument("--stall-tol", type=float, default=DEFAULT_STALL_TOL)
    r.add_argument("-o", "--output", help="directory for traj_<stream>.csv, summary.csv and manifest.json; "
                                            "without it a per-path summary goes to stdout")
    r.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify-supersolution", help="check the Schrödinger super-solution on a modified graph")
    v.add_argument("graph")
    v.set_defaults(func=cmd_verify_supersolution)

    e = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config and/or flags")
    e.add_argument("--config", help="JSON file with ExperimentConfig fields")
    e.add_argument("--kind", choices=EXPERIMENT_KINDS)
    src = e.add_mutually_exclusive_group()
    src.add_argument("--family", choices=FAMILY_KINDS, help="family kind (other family fields from the config)")
    src.add_argument("--graph", help="graph file instead of a family")
    e.add_argument("--center", type=int)
    e.add_argument("-n", type=int, help="number of trajectories")
    e.add_argument("--horizon", type=float)
    e.add_argument("--budget", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--rate-tag")
    e.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config field (JSON value)")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_experiment)

    rp = sub.add_parser("report", help="summarize an experiment output directory")
    rp.add_argument("directory")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"escape-lab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EscapeLabError as exc:
        print(f"escape-lab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
