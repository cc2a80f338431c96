"""Property-based checks of the scalar invariants behind the operator bounds."""

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from semirate import rates
from semirate.bernstein import DUNFORD_SEGAL, EULER, YOSIDA, eval_phi, expm1c, log1pc
from semirate.opcalc import delta_fn, e_fn
from semirate.specfun import c_beta, kummer_1F1
from semirate.suite import frange

PHIS = (YOSIDA, DUNFORD_SEGAL, EULER)
D2 = {"yosida": 2.0, "dunford-segal": 1.0, "euler": 1.0}
SLACK = 1e-12

phis = st.sampled_from(PHIS)
pos = st.floats(1e-6, 1e4)
times = st.floats(1e-3, 50.0)
steps = st.integers(1, 4096)
alphas = st.floats(0.0, 2.0)


@st.composite
def rhp(draw):
    """Points of the closed right half-plane, including both axes."""
    mag = draw(st.floats(1e-6, 1e3))
    angle = draw(st.floats(-math.pi / 2, math.pi / 2))
    return cmath.rect(mag, angle)


class TestBernsteinShape:
    @given(phis, pos, st.floats(1.001, 10.0))
    def test_positive_increasing_concave(self, phi, x, r):
        a, b, c = (float(np.real(eval_phi(phi, v))) for v in (x, r * x, r * r * x))
        # 1 - e^{-x} saturates at 1.0 in floating point, so monotonicity is weak
        assert 0 < a <= b
        # concavity on the geometric triple x < r x < r^2 x
        assert (c - b) / (r * r * x - r * x) <= (b - a) / (r * x - x) * (1 + 1e-9)

    @given(phis, rhp(), times)
    def test_subordinated_contraction(self, phi, lam, t):
        assert abs(np.exp(-t * eval_phi(phi, lam))) <= 1 + SLACK

    @given(phis, rhp())
    def test_below_identity(self, phi, lam):
        # |phi(lam)| <= |lam| since phi'(0+) = 1 bounds the Levy kernel
        assert abs(eval_phi(phi, lam)) <= abs(lam) * (1 + 1e-12)


class TestScalarBounds:
    @given(phis, rhp(), times)
    def test_second_order(self, phi, lam, t):
        got = abs(delta_fn(phi, t)(lam))
        # rounding in the exponent difference is of order eps * t|lam|
        assert got <= t * D2[phi.name] * abs(lam) ** 2 / 2 * (1 + 1e-9) + 1e-15 * t * abs(lam)

    @given(phis, rhp(), times, steps, alphas)
    def test_fractional_delta(self, phi, lam, t, n, alpha):
        got = abs(delta_fn(phi, t, n)(lam)) * abs(lam) ** -alpha
        assert got <= 8 * (t * D2[phi.name] / n) ** (alpha / 2) * (1 + 1e-9)

    @given(phis, rhp(), times, steps, alphas)
    def test_fractional_e(self, phi, lam, t, n, alpha):
        got = abs(e_fn(phi, t, n)(lam)) * abs(lam) ** -alpha
        assert got <= 8 * (t * t * D2[phi.name] / n) ** (alpha / 2) * (1 + 1e-9)

    @given(st.floats(0.1, 2.0), times, steps)
    def test_bound_scaling(self, alpha, t, n):
        # the bound falls by 2^-alpha when n is multiplied by 4
        b = lambda m: 8 * (t / m) ** (alpha / 2)
        assert b(4 * n) / b(n) == pytest.approx(2.0 ** -alpha, rel=1e-12)


class TestElementary:
    @given(st.complex_numbers(max_magnitude=20.0, allow_nan=False, allow_infinity=False))
    @settings(max_examples=60)
    def test_expm1c(self, z):
        want = complex(mpmath.expm1(mpmath.mpc(z)))
        assert abs(complex(expm1c(z)) - want) <= 1e-14 * (abs(want) + 1e-300) * max(1.0, abs(z.imag))

    @given(st.complex_numbers(max_magnitude=20.0, allow_nan=False, allow_infinity=False))
    @settings(max_examples=60)
    def test_log1pc(self, z):
        assume(abs(1 + z) > 1e-3)
        want = complex(mpmath.log1p(mpmath.mpc(z)))
        assert abs(complex(log1pc(z)) - want) <= 1e-13 * (abs(want) + 1e-300)

    @given(st.complex_numbers(max_magnitude=1e-3, allow_nan=False, allow_infinity=False))
    def test_round_trip_near_zero(self, z):
        assert abs(complex(log1pc(expm1c(z))) - z) <= 1e-14 * abs(z) + 1e-300


class TestKummer:
    @given(st.floats(0.05, 5.0), st.floats(1.5, 20.0), st.floats(-40.0, 400.0))
    @settings(max_examples=80)
    def test_contiguous_relation(self, a, b, s):
        # b(b-1) M(a,b-1,s) + b(1-b-s) M(a,b,s) + s(b-a) M(a,b+1,s) = 0
        m0, m1, m2 = (float(kummer_1F1(a, bb, s)) for bb in (b - 1, b, b + 1))
        terms = (b * (b - 1) * m0, b * (1 - b - s) * m1, s * (b - a) * m2)
        assert abs(sum(terms)) <= 1e-10 * max(abs(x) for x in terms)

    @given(st.floats(0.05, 10.0))
    @settings(max_examples=25, deadline=None)
    def test_c_beta_range(self, beta):
        c = c_beta(beta)
        assert 1.0 <= c <= 2.0 ** (beta + 1)


class TestBookkeeping:
    @given(st.floats(-5, 5), st.integers(0, 200), st.floats(0.01, 2.0))
    def test_frange_inclusive(self, start, k, step):
        stop = start + k * step
        grid = frange(f"{start!r}:{stop!r}:{step!r}")
        assert len(grid) == k + 1
        assert grid[0] == pytest.approx(start, abs=1e-11)
        assert grid[-1] == pytest.approx(stop, abs=1e-9)

    @given(st.floats(0, 1e3), st.floats(1e-6, 1e3), st.sampled_from(["upper", "lower"]))
    def test_margin_sign(self, error, bound, kind):
        r = rates.RateRecord("s", "p", 1.0, 1.0, 1, error, bound, kind)
        holds = error <= bound if kind == "upper" else error >= bound
        assert (r.margin >= 0) == holds
        if holds:
            assert r.ok(0.0)

    @given(st.floats(0, 1e3), st.floats(1e-6, 1e3))
    def test_report_never_fails(self, error, bound):
        assert rates.RateRecord("s", "p", 1.0, 1.0, 1, error, bound, "report").ok(0.0)
