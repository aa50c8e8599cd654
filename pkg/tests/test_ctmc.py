import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from escape_lab.errors import BeyondRecordedTime, HypothesisViolated, NeverVisitsSubset, UnknownVertex
from escape_lab.families import FamilySpec, make_family
from escape_lab.graph import Sub, build_graph, shortest_path_metric
from escape_lab.modify import required_count, schedule_radius, subdivide, uniform_plan
from escape_lab.graph import ball_and_volume
from escape_lab.ctmc.simulate import (
    Trajectory,
    local_time,
    simulate_batch,
    simulate_trajectory,
    state_at,
    time_change,
)
from escape_lab.ctmc.solvers import (
    exit_time_cdf,
    hitting_probabilities,
    solve_exit_problem,
    verify_integral_max_principle,
)
from escape_lab.ctmc.montecarlo import mc_exit_cdf, mc_jump_counts

from conftest import random_connected_graph


def two_vertex():
    return build_graph([(0, 1, 1.0)], {0: 1.0, 1: 1.0})


def path(n, w=1.0, mu=1.0):
    return build_graph([(i, i + 1, w) for i in range(n - 1)], {i: mu for i in range(n)})


def manual(times, states, end, order=("a", "b", "x")):
    return Trajectory(np.asarray(times, float), np.asarray(states), list(order), "HorizonReached", 0, 0,
                      float(end), len(times) - 1)


class TestSimulate:
    def test_two_vertex_mean_jumps(self):
        jumps = mc_jump_counts(two_vertex(), 0, 10.0, 100_000, seed=11)
        se = jumps.std(ddof=1) / math.sqrt(len(jumps))
        assert abs(jumps.mean() - 10.0) <= 3 * se

    def test_holding_time(self):
        g = build_graph([(0, 1, 2.0)], {0: 4.0, 1: 1.0})
        holds = np.array([simulate_trajectory(g, 0, 1e6, 1, seed=5, stream=i).times[1] for i in range(20_000)])
        se = holds.std(ddof=1) / math.sqrt(len(holds))
        assert abs(holds.mean() - 2.0) <= 3 * se

    def test_determinism(self):
        g = random_connected_graph(np.random.default_rng(3), 12)
        a = simulate_trajectory(g, 0, 50.0, 10_000, seed=42, stream=7)
        b = simulate_trajectory(g, 0, 50.0, 10_000, seed=42, stream=7)
        assert np.array_equal(a.times, b.times) and np.array_equal(a.states, b.states)
        assert a.status == b.status == "HorizonReached"

    def test_batch_streams_independent_of_batch_size(self):
        g = path(6)
        small = simulate_batch(g, 0, 20.0, 10_000, 9, 3)
        large = simulate_batch(g, 0, 20.0, 10_000, 9, 8)
        for s, l in zip(small, large):
            assert np.array_equal(s.times, l.times)

    def test_left_truncation_and_budget(self):
        fam = make_family(FamilySpec("lattice", truncation=3))
        tr = simulate_trajectory(fam.graph, 0, 1e9, 10**6, seed=1)
        assert tr.status == "LeftTruncation" and tr.final_vertex in fam.graph.boundary
        tr = simulate_trajectory(path(5), 0, 100.0, 10, seed=1)
        assert tr.status == "BudgetExhausted" and tr.n_jumps == 10
        # the same ten jumps against a huge horizon look like a stalled clock
        tr = simulate_trajectory(path(5), 0, 1e9, 10, seed=1)
        assert tr.status == "Exploded"

    def test_errors(self):
        with pytest.raises(UnknownVertex):
            simulate_trajectory(path(3), 99, 1.0, 10, seed=0)
        with pytest.raises(ValueError):
            simulate_trajectory(path(3), 0, 0.0, 10, seed=0)
        with pytest.raises(ValueError):
            simulate_trajectory(path(3), 0, 1.0, 0, seed=0)

    def test_reversibility_occupation(self):
        # closed 3-vertex graph: long-run occupation fractions are proportional to mu
        mu = {0: 1.0, 1: 2.0, 2: 3.0}
        g = build_graph([(0, 1, 1.5), (1, 2, 0.7), (0, 2, 1.0)], mu)
        T = 200.0
        fr = np.array([[local_time(tr, {v}, T) / T for v in range(3)]
                       for tr in simulate_batch(g, 0, T, 10**6, 21, 400)])
        target = np.array([1, 2, 3]) / 6
        se = fr.std(axis=0, ddof=1) / math.sqrt(len(fr))
        assert np.all(np.abs(fr.mean(axis=0) - target) <= 3 * se + 1e-3)

    def test_explosion_monotone_in_conductance(self):
        spec = FamilySpec("birth_death", beta=2, truncation=4000, on_violation="clamp")
        g = make_family(spec).graph
        fast = build_graph([(x, y, 10 * w) for x, y, w in g.edges()], g.measure, g.boundary)

        def freq(graph):
            st_ = [tr.status for tr in simulate_batch(graph, 0, 1e3, 20_000, 8, 200, record=False)]
            return sum(s == "Exploded" for s in st_) / len(st_)

        f0, f1 = freq(g), freq(fast)
        se = math.sqrt(max(f0 * (1 - f0), 1e-4) / 200)
        assert f1 >= f0 - 2 * se


class TestLocalTime:
    def test_examples(self):
        tr = manual([0.0, 1.0], [0, 1], 3.0)
        assert local_time(tr, {"a"}, 3.0) == 1.0
        assert local_time(tr, {"a", "b", "x"}, 3.0) == 3.0
        assert local_time(tr, set(), 3.0) == 0.0
        assert local_time(tr, {"b"}, 2.0) == 1.0
        with pytest.raises(BeyondRecordedTime):
            local_time(tr, {"a"}, 3.5)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.1, 30.0))
    def test_additive_and_bounded(self, seed, t):
        g = path(6)
        tr = simulate_trajectory(g, 2, 30.0, 10**5, seed=seed)
        S, T_ = {0, 1}, {3, 5}
        a_s, a_t, a_u = local_time(tr, S, t), local_time(tr, T_, t), local_time(tr, S | T_, t)
        assert a_u == pytest.approx(a_s + a_t, abs=1e-12)
        assert 0.0 <= a_u <= t
        assert local_time(tr, set(g.vertices), t) == pytest.approx(t, abs=1e-12)


class TestTimeChange:
    def test_excision(self):
        tr = manual([0.0, 1.0, 3.0], [0, 2, 0], 4.0)
        out = time_change(tr, {"a"})
        assert out.vertices == ["a"] and out.end_time == 2.0 and list(out.times) == [0.0]

    def test_identity(self):
        tr = simulate_trajectory(path(5), 0, 20.0, 10**5, seed=3)
        out = time_change(tr, set(range(5)))
        assert np.array_equal(out.times, tr.times) and np.array_equal(out.states, tr.states)
        assert out.end_time == tr.end_time

    def test_never_visits(self):
        with pytest.raises(NeverVisitsSubset):
            time_change(manual([0.0], [0], 1.0), {"b"})

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_idempotent(self, seed):
        tr = simulate_trajectory(path(7), 3, 25.0, 10**5, seed=seed)
        S = {1, 2, 3, 4}
        once = time_change(tr, S)
        twice = time_change(once, S)
        assert np.array_equal(once.times, twice.times) and np.array_equal(once.states, twice.states)
        assert once.end_time == twice.end_time == pytest.approx(local_time(tr, S, tr.end_time))

    def test_trace_of_modified_graph_is_original(self):
        fam = make_family(FamilySpec("lattice", truncation=10))
        m = subdivide(fam.graph, fam.sigma, uniform_plan(fam.graph, 4))
        tr = simulate_trajectory(m.graph, 0, 30.0, 10**5, seed=2)
        out = time_change(tr, lambda v: not isinstance(v, Sub))
        assert all(not isinstance(v, Sub) for v in out.vertices)
        assert state_at(out, 0.0) == 0


class TestHitting:
    @pytest.fixture
    def edge4(self):
        g = build_graph([(0, 1, 1.0)], {0: 1.0, 1: 1.0})
        sigma = {(0, 1): 0.5}
        from escape_lab.graph import AdaptedWeight
        return subdivide(g, AdaptedWeight.symmetric(sigma), uniform_plan(g, 4)).graph

    @pytest.mark.parametrize("k,p0", [(1, 0.75), (2, 0.5), (3, 0.25)])
    def test_subdivided_edge(self, edge4, k, p0):
        h = hitting_probabilities(edge4, Sub(0, 1, k), [0, 1])
        assert h[0] == pytest.approx(p0, abs=1e-12) and h[1] == pytest.approx(1 - p0, abs=1e-12)

    def test_start_in_targets(self):
        assert hitting_probabilities(path(4), 2, [2, 0]) == {2: 1.0, 0: 0.0}

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 9), st.integers(0, 2**31))
    def test_sums_to_one(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(rng, n)
        targets = [int(v) for v in rng.choice(n, size=2, replace=False)]
        start = next(v for v in range(n) if v not in targets)
        assert sum(hitting_probabilities(g, start, targets).values()) == pytest.approx(1.0, abs=1e-10)


class TestExit:
    def test_single_vertex(self):
        t = np.linspace(0, 5, 51)
        u = exit_time_cdf(two_vertex(), [0], 0, t)
        assert u[0] == 0.0
        assert np.max(np.abs(u - (1 - np.exp(-t)))) <= 1e-8

    def test_against_monte_carlo(self):
        g = path(5)
        t = np.array([0.0, 0.5, 1.0, 2.0])
        u = exit_time_cdf(g, [1, 2, 3], 2, t)
        p, se = mc_exit_cdf(g, [1, 2, 3], 2, t, 100_000, seed=4)
        assert np.all(np.abs(u - p) <= 3 * se + 1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(4, 9), st.integers(0, 2**31))
    def test_monotone_bounded(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(rng, n)
        K = list(range(n - 1))
        sol = solve_exit_problem(g, K, np.linspace(0, 3, 61))
        assert np.all(sol.u >= -1e-12) and np.all(sol.u <= 1 + 1e-12)
        assert np.all(np.diff(sol.u, axis=0) >= -1e-10)


def _bump_instance():
    g = path(5)
    L = [0, 1, 2, 3, 4]
    K = [1, 2, 3]
    sol = solve_exit_problem(g, L, np.linspace(0, 2, 201))
    return g, K, L, sol


def _zero_xi(x, t):
    return np.zeros(np.shape(t))


class TestMaxPrinciple:
    def test_eta_zero(self):
        g, K, L, sol = _bump_instance()
        rep = verify_integral_max_principle(g, K, L, sol, {}, _zero_xi, 2.0, dxi_dt=_zero_xi)
        assert rep.ok and np.all(rep.lhs == 0) and np.all(rep.rhs == 0)

    def test_bump(self):
        g, K, L, sol = _bump_instance()
        rep = verify_integral_max_principle(g, K, L, sol, {1: 0.5, 2: 1.0, 3: 0.5}, _zero_xi, 2.0, dxi_dt=_zero_xi)
        assert rep.ok and all(v for k, v in rep.hypotheses.items())

    def test_hypothesis_violation(self):
        g, K, L, sol = _bump_instance()
        with pytest.raises(HypothesisViolated):
            verify_integral_max_principle(g, K, L, sol, {0: 1.0}, _zero_xi, 2.0)
        with pytest.raises(HypothesisViolated):
            verify_integral_max_principle(g, K, L, sol, {2: 1.0}, lambda x, t: np.full(np.shape(t), float(x)), 2.0)


@pytest.fixture(scope="module")
def subdivided_instance():
    """Clipped exponential eta and linear-in-time xi on a subdivided path around z."""
    fam = make_family(FamilySpec("lattice", truncation=60))
    g, s = fam.graph, fam.sigma
    R, r = schedule_radius(1), 5.0
    _, vol = ball_and_volume(g, s, 0, R)
    f = math.log(vol) - math.log(min(g.mu(v) for v in g.vertices))
    sig_n = 1.0 / required_count(f, R)
    alpha = (2 * f + 2 * math.log(math.log(R))) / r
    m = subdivide(g, s, uniform_plan(g, 8))
    d = shortest_path_metric(m.graph, m.sigma, 20, r + 1).distances
    L = [v for v, dv in d.items() if dv <= r + 1e-12]
    K = [v for v, dv in d.items() if dv <= r - sig_n + 1e-12]
    top = math.exp(alpha * (r - sig_n))
    eta = {x: max(top - math.exp(alpha * d[x]), 0.0) / (top - 1) for x in K}
    c = 2 * alpha**2 * math.e**4

    def xi(x, t):
        return -c * np.asarray(t) - 2 * alpha * d[x]

    def dxi(x, t):
        return np.full(np.shape(t), -c)

    sol = solve_exit_problem(m.graph, L, np.linspace(0, 2, 401))
    return m.graph, K, L, sol, eta, xi, dxi


def test_max_principle_clipped_exponential(subdivided_instance):
    g, K, L, sol, eta, xi, dxi = subdivided_instance
    rep = verify_integral_max_principle(g, K, L, sol, eta, xi, 2.0, dxi_dt=dxi)
    assert rep.ok
    assert all(rep.hypotheses[k] for k in (1, 2, 3, 4, "K_in_int_L"))
    assert np.max(rep.lhs[1:] / rep.rhs[1:]) < 0.1


def test_max_principle_detects_wrong_u(subdivided_instance):
    g, K, L, sol, eta, xi, dxi = subdivided_instance
    u = np.ones_like(sol.u)
    u[0] = 0.0
    assert not verify_integral_max_principle(g, K, L, replace(sol, u=u), eta, xi, 2.0, dxi_dt=dxi).ok
