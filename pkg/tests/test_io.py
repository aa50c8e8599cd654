import json

import numpy as np
import pytest
from hypothesis import given, settings

from escape_lab.families import FamilySpec, make_family
from escape_lab.graph import Sub
from escape_lab.io import decode_vertex, dumps_graph, encode_vertex, load_graph, parse_label, save_graph, vertex_label
from escape_lab.modify import subdivide, uniform_plan

from conftest import small_graphs


def same_graph(a, b):
    assert set(a.vertices) == set(b.vertices)
    assert set(a.boundary) == set(b.boundary)
    for x in a.vertices:
        assert a.mu(x) == b.mu(x)
        assert dict(a.neighbors(x)) == dict(b.neighbors(x))


@pytest.mark.parametrize("v", [0, 17, Sub(3, 4, 2), Sub(0, 1, 1)])
def test_vertex_codecs(v):
    assert decode_vertex(json.loads(json.dumps(encode_vertex(v)))) == v
    assert parse_label(vertex_label(v)) == v


def test_bad_vertex():
    with pytest.raises(ValueError):
        decode_vertex("3")
    with pytest.raises(ValueError):
        decode_vertex(True)


@settings(max_examples=40, deadline=None)
@given(small_graphs())
def test_round_trip_exact(tmp_path_factory, case):
    g, sigma, _ = case
    path = tmp_path_factory.mktemp("io") / "g.json"
    save_graph(path, g, sigma, {"note": "x"})
    back = load_graph(path)
    same_graph(g, back.graph)
    for x, y, _ in g.edges():
        assert back.sigma(x, y) == sigma(x, y)
    assert back.provenance == {"note": "x"}
    assert dumps_graph(back.graph, back.sigma, back.provenance) == path.read_text()


def test_modified_round_trip(tmp_path):
    fam = make_family(FamilySpec("tree", alpha=1, truncation=4))
    m = subdivide(fam.graph, fam.sigma, uniform_plan(fam.graph, 3))
    path = tmp_path / "m.json"
    save_graph(path, m.graph, modified=m)
    back = load_graph(path)
    same_graph(m.graph, back.graph)
    same_graph(m.original, back.modified.original)
    assert dict(back.modified.plan.items()) == dict(m.plan.items())
    assert all(back.sigma(x, y) == m.sigma(x, y) for x, y, _ in m.graph.edges())


def test_rejects_foreign_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"format": "other"}))
    with pytest.raises(ValueError):
        load_graph(p)


def test_float_repr_exact(tmp_path):
    fam = make_family(FamilySpec("birth_death", beta=1, truncation=30, on_violation="clamp"))
    p = tmp_path / "bd.json"
    save_graph(p, fam.graph, fam.sigma)
    back = load_graph(p)
    w = np.array([back.graph.w(x, y) for x, y, _ in fam.graph.edges()])
    assert np.array_equal(w, np.array([w_ for _, _, w_ in fam.graph.edges()]))
