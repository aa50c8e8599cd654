import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from escape_lab.errors import AssumptionViolated, Overflow, UnclassifiedRegime
from escape_lab.families import FamilySpec, classify_family, make_anti_tree, make_birth_death, make_family, make_lattice, make_tree
from escape_lab.graph import shortest_path_metric, verify_adapted
from escape_lab.io import dumps_graph
from escape_lab.rate import volume_profile


def spec(kind, **kw):
    return FamilySpec(kind, **kw)


class TestBirthDeath:
    def test_first_edge_equality_is_ok(self):
        fam = make_birth_death(spec("birth_death", truncation=5))
        assert fam.w(0) == 0.5
        assert fam.sigma(0, 1) == 1.0

    def test_sigma_harmonic(self):
        fam = make_birth_death(spec("birth_death", truncation=200))
        for n in range(200):
            assert fam.sigma(n, n + 1) == pytest.approx(1 / (n + 1), rel=1e-14)
        pm = shortest_path_metric(fam.graph, fam.sigma, 0)
        for n in (10, 100, 200):
            assert pm[n] == pytest.approx(sum(1 / (k + 1) for k in range(n)), rel=1e-12)
        # d(0, n) grows like log n
        assert pm[200] / math.log(200) == pytest.approx(1.0, abs=0.25)

    def test_beta2_not_conservative(self):
        assert classify_family(spec("birth_death", beta=2)).conservative == "no"

    def test_beta2_violates_measure_bound(self):
        with pytest.raises(AssumptionViolated):
            make_family(spec("birth_death", beta=2, truncation=10))
        fam = make_family(spec("birth_death", beta=2, truncation=10, on_violation="clamp"))
        assert verify_adapted(fam.graph, fam.sigma).ok


class TestAntiTree:
    def test_ray(self):
        fam = make_anti_tree(spec("anti_tree", truncation=20))
        assert all(fam.layer_size(n) == 1 for n in range(21))
        assert fam.degree(5) == 2.0
        assert fam.sigma(4, 5) == pytest.approx(1 / math.sqrt(2))

    def test_layer_sizes(self):
        fam = make_anti_tree(spec("anti_tree", alpha=2, beta=1, truncation=4))
        for n in range(4):
            assert fam.layer_size(n + 1) == math.floor((n + 2) ** 2 * math.log(n + 3))

    def test_complete_bipartite_between_layers(self):
        fam = make_anti_tree(spec("anti_tree", alpha=1, truncation=6))
        g = fam.graph
        for v in fam.layer(3):
            assert set(g.neighbors(v)) == set(fam.layer(2)) | set(fam.layer(4))

    def test_classes(self):
        assert classify_family(spec("anti_tree", alpha=2, beta=1)).rate_form.tag == "exp(c*t)"
        assert classify_family(spec("anti_tree", alpha=3)).conservative == "outside-theorem"
        assert classify_family(spec("anti_tree", alpha=1)).rate_form.tag == "c*sqrt(t*log(t))"
        c = classify_family(spec("anti_tree", alpha=2, beta=0))
        assert c.volume_class.kind == "stretched_exp" and c.volume_class.exponent == 1
        assert c.rate_form.tag == "c*t"


class TestTree:
    def test_ray(self):
        fam = make_tree(spec("tree", truncation=12))
        g = fam.graph
        assert len(g) == 13 and g.n_edges == 12

    def test_branching(self):
        fam = make_tree(spec("tree", alpha=1, truncation=4))
        # root has floor(2 * log 3) = 2 children
        assert len(fam.graph.neighbors(0)) == math.floor(2 * math.log(3))

    def test_classes(self):
        assert classify_family(spec("tree", alpha=1, beta=0)).rate_form.tag == "exp(c*t)"
        c = classify_family(spec("tree", alpha=1, beta=1))
        assert c.sharp is False and c.conservative != "yes"


class TestLattice:
    def test_z1(self):
        fam = make_lattice(spec("lattice", truncation=10))
        assert fam.degree(0) == 2.0
        for x, y, _ in fam.graph.edges():
            assert fam.sigma(x, y) == pytest.approx(1 / math.sqrt(2))

    def test_z2_ids(self):
        fam = make_lattice(spec("lattice", d=2, truncation=5))
        assert len(fam.graph) == 2 * 5 * 6 + 1
        v = fam.vertex((2, -1))
        assert fam.coords(v) == (2, -1)
        assert fam.degree(v) == 4.0

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_polynomial_class(self, d):
        c = classify_family(spec("lattice", d=d))
        assert c.volume_class.kind == "polynomial" and c.volume_class.exponent == d
        assert c.rate_form.tag == "c*sqrt(t*log(t))"

    def test_exp_class(self):
        assert classify_family(spec("lattice", alpha=2, beta=1)).rate_form.tag == "exp(c*t)"


def test_birth_death_exp_exp():
    c = classify_family(spec("birth_death", beta=1, gamma=1))
    assert c.conservative == "yes" and c.rate_form.tag == "exp(exp(c*t))"


def test_unclassified():
    with pytest.raises((UnclassifiedRegime, ValueError)):
        classify_family(spec("tree", alpha=-1))


def test_overflow_guard():
    with pytest.raises(Overflow):
        make_family(spec("anti_tree", alpha=2, truncation=60)).graph


FAMILIES = [
    spec("birth_death", truncation=40),
    spec("birth_death", beta=1, gamma=1, truncation=40, on_violation="clamp"),
    spec("anti_tree", alpha=1, truncation=12),
    spec("anti_tree", alpha=2, beta=1, truncation=6),
    spec("tree", alpha=1, truncation=5),
    spec("tree", truncation=30),
    spec("lattice", truncation=30),
    spec("lattice", d=2, alpha=1, beta=1, truncation=8),
    spec("lattice", d=3, truncation=5),
]


@pytest.mark.parametrize("s", FAMILIES, ids=lambda s: f"{s.kind}-{s.alpha}-{s.beta}-{s.gamma}-d{s.d}")
def test_sigma_adapted_everywhere(s):
    fam = make_family(s)
    rep = verify_adapted(fam.graph, fam.sigma)
    assert rep.ok, rep


@pytest.mark.parametrize("s", FAMILIES[:4], ids=str)
def test_deterministic(s):
    a = dumps_graph(make_family(s).graph, make_family(s).sigma)
    b = dumps_graph(make_family(s).graph, make_family(s).sigma)
    assert a == b


# Volume growth against the tabulated class, on truncations where the asymptotics have set in.
# Polynomial classes: slope of log V against log r is D.  Stretched-exponential: slope of
# log log V against log r is the exponent.
GROWTH = [
    (spec("lattice", truncation=2000), "poly", 1.0),
    (spec("lattice", d=2, truncation=60), "poly", 2.0),
    (spec("lattice", d=3, truncation=20), "poly", 3.0),
    (spec("lattice", alpha=1, truncation=3000), "poly", 2.0),
    (spec("anti_tree", alpha=0.5, truncation=500), "poly", 2.0),
    (spec("birth_death", truncation=100000), "exp", 1.0),
]


@pytest.mark.parametrize("s,mode,expected", GROWTH, ids=lambda x: str(x) if not isinstance(x, FamilySpec) else f"{x.kind}-{x.alpha}-d{x.d}")
def test_volume_growth_matches_class(s, mode, expected):
    fam = make_family(s)
    cls = classify_family(s).volume_class
    assert cls.exponent == expected
    p = volume_profile(fam.graph, fam.sigma, fam.root)
    R = p.max_radius
    rs = np.linspace(R / 4, R, 60)
    lv = np.log(p.volume(rs))
    y = lv if mode == "poly" else np.log(lv)
    slope = np.polyfit(np.log(rs), y, 1)[0]
    assert abs(slope - expected) <= 0.15 * expected


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["birth_death", "anti_tree", "tree", "lattice"]), st.floats(0, 1.5), st.floats(0, 1.5))
def test_random_parameters_adapted(kind, a, b):
    s = FamilySpec(kind, alpha=a, beta=b, truncation=5 if kind != "birth_death" else 30, on_violation="clamp")
    fam = make_family(s)
    assert verify_adapted(fam.graph, fam.sigma).ok
