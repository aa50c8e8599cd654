import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from escape_lab.asymptotics import VolumeClass
from escape_lab.errors import DomainError, OutOfRange, TruncationTooSmall, UnclassifiedRegime
from escape_lab.families import FamilySpec, make_family
from escape_lab.rate import (
    RateFunction,
    SyntheticProfile,
    conservativeness_test,
    corollary_rate,
    psi,
    psi_inverse,
    volume_profile,
)


@lru_cache(maxsize=None)
def _z1_profile():
    fam = make_family(FamilySpec("lattice", truncation=1200))
    return volume_profile(fam.graph, fam.sigma, 0)


@pytest.fixture(scope="module")
def z1():
    return _z1_profile()


def const_denominator(D):
    return SyntheticProfile(denominator_fn=lambda r: np.full(np.shape(r), float(D)), certified_radius=1e6)


class TestProfile:
    def test_zero_radius(self):
        fam = make_family(FamilySpec("birth_death", truncation=50))
        p = volume_profile(fam.graph, fam.sigma, 0)
        assert p.volume(0.0) == fam.graph.mu(0)

    def test_z1_counts(self, z1):
        for r in [0.0, 0.5, 1 / math.sqrt(2), 1.0, 3.3, 10.0, 100.0, 800.0]:
            expected = 1 + 2 * math.floor(r * math.sqrt(2) + 1e-9)
            assert z1.volume(r) == expected

    def test_guard(self, z1):
        with pytest.raises(TruncationTooSmall):
            z1.volume(z1.certified_radius + 1)


class TestPsi:
    def test_at_r_hat(self, z1):
        assert psi(z1, 1.0, 32.0, 32.0) == 0.0

    def test_linear(self):
        p = SyntheticProfile(denominator_fn=lambda r: np.asarray(r, dtype=float), certified_radius=1e4)
        rate = RateFunction(p, 2.5, 10.0)
        for R in [10.0, 11.0, 500.0, 9999.0]:
            assert rate(R) == pytest.approx(2.5 * (R - 10.0), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("D", [0.7, 3.0, 41.0])
    def test_constant_denominator(self, D):
        rate = RateFunction(const_denominator(D), 1.3, 5.0, r_max=5000.0)
        for R in [5.0, 6.0, 77.7, 4999.0]:
            exact = 1.3 * (R * R - 25.0) / (2 * D)
            assert rate(R) == pytest.approx(exact, rel=1e-8, abs=1e-12)

    def test_domain(self, z1):
        with pytest.raises(DomainError):
            RateFunction(z1, 1.0, 32.0).psi(31.0)
        with pytest.raises(DomainError):
            RateFunction(z1, 0.0, 32.0)
        with pytest.raises(TruncationTooSmall):
            RateFunction(z1, 1.0, 32.0).psi(1e9)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(40, 800), st.floats(40, 800))
    def test_additive(self, a, b):
        R1, R2 = sorted((a, b))
        p = _z1_profile()
        whole = RateFunction(p, 1.0, 32.0)(R2)
        parts = RateFunction(p, 1.0, 32.0)(R1) + RateFunction(p, 1.0, R1)(R2)
        assert whole == pytest.approx(parts, rel=1e-10)

    def test_scaling(self, z1):
        R = np.linspace(32, 800, 50)
        assert np.array_equal(RateFunction(z1, 2.0, 32.0)(R), 2.0 * RateFunction(z1, 1.0, 32.0)(R))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 5.0), st.floats(0.5, 3.0))
    def test_domination(self, delta, D):
        small = SyntheticProfile(log_volume_fn=lambda r: D * np.log(r), certified_radius=1e4)
        big = SyntheticProfile(log_volume_fn=lambda r: D * np.log(r) + delta, certified_radius=1e4)
        R = np.geomspace(10, 1e4, 20)
        assert np.all(RateFunction(big, 1.0, 10.0)(R) <= RateFunction(small, 1.0, 10.0)(R) * (1 + 1e-12))

    def test_r_hat_clamped_to_loglog_domain(self, z1):
        rate = RateFunction(z1, 1.0, 1.0)
        assert rate.lo == pytest.approx(math.e + 0.01)


class TestInverse:
    def test_zero(self, z1):
        assert psi_inverse(RateFunction(z1, 1.0, 32.0), 0.0) == 32.0

    def test_square(self):
        # psi(R) = R^2 - R_hat^2 from the denominator 1/2
        p = SyntheticProfile(denominator_fn=lambda r: np.full(np.shape(r), 0.5), certified_radius=1e3)
        rate = RateFunction(p, 1.0, 3.0)
        assert rate.psi_inverse(4.0 + 0.0) == pytest.approx(math.sqrt(4.0 + 9.0), rel=1e-12)
        assert rate.psi_inverse(91.0) == pytest.approx(10.0, rel=1e-12)

    @pytest.mark.parametrize("t", [1.0, 10.0, 100.0, 1e3, 1e4])
    def test_round_trip(self, z1, t):
        rate = RateFunction(z1, 1.0, 32.0)
        R = rate.psi_inverse(t)
        assert abs(rate(R) - t) / t <= 1e-6

    def test_beyond_table(self, z1):
        rate = RateFunction(z1, 1.0, 32.0)
        with pytest.raises(OutOfRange):
            rate.psi_inverse(rate.t_max * 2)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-3, 1.0))
    def test_monotone(self, frac):
        rate = RateFunction(const_denominator(2.0), 1.0, 5.0, r_max=1e4)
        t1, t2 = frac * rate.t_max, min(1.0, frac * 1.01) * rate.t_max
        assert rate.psi_inverse(t1) <= rate.psi_inverse(t2)


class TestConservativeness:
    def test_polynomial_diverges(self, z1):
        rep = conservativeness_test(z1)
        assert rep.diverges and rep.fitted_power > -1

    def test_cubic_converges(self):
        p = SyntheticProfile(log_volume_fn=lambda r: np.asarray(r, dtype=float) ** 3, certified_radius=100.0)
        rep = conservativeness_test(p)
        assert not rep.diverges
        assert rep.fitted_power == pytest.approx(-2.0, abs=0.05)

    def test_antitree_double_exponential_converges(self):
        # bounded intrinsic diameter: the certified range stalls below one unit
        fam = make_family(FamilySpec("anti_tree", alpha=2, beta=2, truncation=10))
        rep = conservativeness_test(volume_profile(fam.graph, fam.sigma, 0))
        assert rep.outside_theorem and not rep.diverges
        assert rep.r_range[1] < 1.0 and rep.partial_integral < 0.1


class TestCorollary:
    def test_table(self):
        assert corollary_rate(VolumeClass("polynomial", 3)).tag == "c*sqrt(t*log(t))"
        assert corollary_rate(VolumeClass("stretched_exp", 1.0)).tag == "c*t"
        assert corollary_rate(VolumeClass("stretched_exp", 0.5))(np.array([8.0]), 1.0)[0] == pytest.approx(8.0 ** (1 / 1.5))
        assert corollary_rate(VolumeClass("gaussian")).tag == "exp(c*t)"
        assert corollary_rate(VolumeClass("gaussian_log")).tag == "exp(exp(c*t))"

    def test_unclassified(self):
        with pytest.raises(UnclassifiedRegime):
            corollary_rate(VolumeClass("infinite"))


# Synthetic class-exact profiles: the numeric psi^-1 follows the closed form's growth exponent.
# ``lift`` straightens the exponential forms (log, log log) so that lift(phi(t)) ~ t^p; the fitted
# exponent p of lift(psi^-1(t)) is compared with the same fit on the closed form over the upper
# decades of the tabulated range, each lifted curve anchored at its own t = 0 value. Constants c differ between the two and do not enter p.
def _ident(R):
    return R


def _loglog(R):
    return np.log(np.log(R))


CLASSES = [
    ("polynomial D=2", VolumeClass("polynomial", 2), lambda r: 2 * np.log(r), 1e7, _ident),
    ("exp(r^0.5)", VolumeClass("stretched_exp", 0.5), lambda r: np.sqrt(r), 1e7, _ident),
    ("exp(r)", VolumeClass("stretched_exp", 1.0), lambda r: np.asarray(r, dtype=float), 1e7, _ident),
    ("exp(r^2)", VolumeClass("gaussian"), lambda r: np.asarray(r, dtype=float) ** 2, 1e150, np.log),
    ("exp(r^2 log r)", VolumeClass("gaussian_log"), lambda r: r**2 * np.log(r), 1e150, _loglog),
]


@pytest.mark.parametrize("name,vc,logv,r_max,lift", CLASSES, ids=[c[0] for c in CLASSES])
def test_psi_inverse_matches_corollary(name, vc, logv, r_max, lift):
    form = corollary_rate(vc)
    rate = RateFunction(SyntheticProfile(log_volume_fn=logv, certified_radius=r_max), 1.0, 32.0, r_max=r_max)
    t = np.geomspace(rate.t_max * 0.05, rate.t_max * 0.999, 25)
    num = lift(rate.psi_inverse(t))
    closed = lift(form(t, 1.0))
    if lift is not _ident:
        # both curves anchored at their t = 0 value: R_hat for psi^-1, phi(0) for the closed form
        num = num - lift(np.array([rate.lo]))[0]
        closed = closed - lift(form(np.array([0.0]), 1.0))[0]
    p_num = np.polyfit(np.log(t), np.log(num), 1)[0]
    p_closed = np.polyfit(np.log(t), np.log(closed), 1)[0]
    assert abs(p_num - p_closed) <= 0.15 * abs(p_closed), (p_num, p_closed)
