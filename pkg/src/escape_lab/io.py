"""JSON graph files.

Layout::

    {
      "format": "escape-lab-graph", "version": 1,
      "vertices": [0, 1, {"edge": [0, 1], "k": 1}, ...],
      "edges": [{"u": 0, "v": 1, "w": 1.0}, ...],
      "mu": {"0": 1.0, "0~1#1": 0.5, ...},
      "boundary": [...],
      "sigma": {"edges": [{"u": 0, "v": 1, "sigma": 0.7071067811865475}, ...]},
      "provenance": {...}
    }

Original vertices are JSON integers; a subdivision point is an object with
its original edge and index.  ``mu`` is keyed by the vertex label (``"3"`` or
``"3~4#2"``).  Floats are written with Python's shortest round-trip repr,
so a save/load cycle is exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .graph import AdaptedWeight, Sub, WeightedGraph, vertex_key
from .modify import ModifiedGraph, SubdivisionPlan

__all__ = ["GraphFile", "encode_vertex", "decode_vertex", "vertex_label", "parse_label", "save_graph", "load_graph", "dumps_graph"]

FORMAT = "escape-lab-graph"


def encode_vertex(v):
    if isinstance(v, Sub):
        return {"edge": [encode_vertex(v.u), encode_vertex(v.v)], "k": v.k}
    return int(v)


def decode_vertex(obj):
    if isinstance(obj, dict):
        u, v = obj["edge"]
        return Sub(decode_vertex(u), decode_vertex(v), int(obj["k"]))
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ValueError(f"bad vertex id {obj!r}")
    return obj


def vertex_label(v) -> str:
    if isinstance(v, Sub):
        return f"{v.u}~{v.v}#{v.k}"
    return str(v)


def parse_label(s: str):
    if "#" in s:
        edge, k = s.split("#")
        u, v = edge.split("~")
        return Sub(int(u), int(v), int(k))
    return int(s)


def _graph_payload(g: WeightedGraph, sigma: AdaptedWeight | None) -> dict:
    order = g.sorted_vertices
    out = {
        "vertices": [encode_vertex(v) for v in order],
        "edges": [{"u": encode_vertex(x), "v": encode_vertex(y), "w": w} for x, y, w in g.edges()],
        "mu": {vertex_label(v): g.mu(v) for v in order},
        "boundary": [encode_vertex(v) for v in sorted(g.boundary, key=vertex_key)],
    }
    if sigma is not None:
        out["sigma"] = {"edges": [{"u": encode_vertex(x), "v": encode_vertex(y), "sigma": sigma(x, y)} for x, y, _ in g.edges()]}
    return out


def _graph_from_payload(data: dict) -> tuple[WeightedGraph, AdaptedWeight | None]:
    vertices = [decode_vertex(v) for v in data["vertices"]]
    adj = {v: {} for v in vertices}
    for e in data["edges"]:
        x, y = decode_vertex(e["u"]), decode_vertex(e["v"])
        adj[x][y] = e["w"]
        adj[y][x] = e["w"]
    mu = {parse_label(k): float(m) for k, m in data["mu"].items()}
    g = WeightedGraph(adj, mu, [decode_vertex(v) for v in data.get("boundary", [])])
    sigma = None
    if "sigma" in data:
        sigma = AdaptedWeight.symmetric(
            {(decode_vertex(e["u"]), decode_vertex(e["v"])): e["sigma"] for e in data["sigma"]["edges"]}
        )
    return g, sigma


@dataclass
class GraphFile:
    graph: WeightedGraph
    sigma: AdaptedWeight | None
    provenance: dict = field(default_factory=dict)
    modified: ModifiedGraph | None = None


def dumps_graph(g: WeightedGraph, sigma: AdaptedWeight | None = None, provenance: dict | None = None,
                modified: ModifiedGraph | None = None) -> str:
    data = {"format": FORMAT, "version": 1}
    if modified is not None:
        g, sigma = modified.graph, modified.sigma
    data.update(_graph_payload(g, sigma))
    prov = dict(provenance or {})
    if modified is not None:
        prov["subdivision"] = {
            "plan": [{"u": encode_vertex(x), "v": encode_vertex(y), "n": n}
                     for (x, y), n in sorted(modified.plan.items(), key=lambda kv: (vertex_key(kv[0][0]), vertex_key(kv[0][1])))],
            "original": _graph_payload(modified.original, modified.sigma_o),
        }
    data["provenance"] = prov
    return json.dumps(data, indent=1, sort_keys=False) + "\n"


def save_graph(path, g: WeightedGraph, sigma: AdaptedWeight | None = None, provenance: dict | None = None,
               modified: ModifiedGraph | None = None) -> None:
    Path(path).write_text(dumps_graph(g, sigma, provenance, modified))


def load_graph(path) -> GraphFile:
    data = json.loads(Path(path).read_text())
    if data.get("format") != FORMAT:
        raise ValueError(f"{path}: not an {FORMAT} file")
    g, sigma = _graph_from_payload(data)
    prov = data.get("provenance", {})
    modified = None
    sub = prov.get("subdivision")
    if sub is not None:
        g_o, sigma_o = _graph_from_payload(sub["original"])
        plan = SubdivisionPlan({(decode_vertex(p["u"]), decode_vertex(p["v"])): p["n"] for p in sub["plan"]})
        modified = ModifiedGraph(g, sigma, g_o, sigma_o, plan)
    return GraphFile(g, sigma, prov, modified)
