"""Kernels of the measure algebra and their norms."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammainc

from semirate.a1plus import (
    C2, delta_fractional_bounds, delta_kernel, delta_kernel_density, delta_measure, fractional_delta,
    fractional_delta_density, interpolation_bound, make_u, make_v, raw_moments, scaled_delta_bounds,
)
from semirate.bernstein import DUNFORD_SEGAL, EULER, IDENTITY, YOSIDA, eval_phi
from semirate.errors import UnsupportedKind
from semirate.bernstein import BernsteinFunction, LevyTriple
from semirate.specfun import c_beta

PHIS = (YOSIDA, DUNFORD_SEGAL, EULER)


def delta(phi, t, z):
    return np.exp(-t * eval_phi(phi, z)) - np.exp(-t * z)


class TestKernels:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.5, 4.0])
    def test_u_transform_and_norm(self, beta):
        u = make_u(beta, 1.5)
        if beta.is_integer():
            z = 0.7 + 0.4j
            assert u.measure.laplace(z) == pytest.approx(u(z), rel=1e-8)
        assert u.norm() == pytest.approx(c_beta(beta), rel=1e-10)

    def test_u2_norm(self):
        assert make_u(2.0, 3.0).norm() == pytest.approx(C2, abs=1e-12)

    @pytest.mark.parametrize("beta,tau", [(0.5, 2.0), (3.0, 0.5)])
    def test_v(self, beta, tau):
        v = make_v(beta, tau)
        assert v.measure.laplace(1.0) == pytest.approx((1 + tau) ** -beta, rel=1e-10)

    def test_rejects(self):
        with pytest.raises(ValueError):
            make_u(0.0, 1.0)
        with pytest.raises(ValueError):
            make_v(1.0, -1.0)


class TestDelta:
    @pytest.mark.parametrize("phi", PHIS, ids=lambda p: p.name)
    def test_delta_measure_transform(self, phi):
        e = delta_measure(phi, 1.3)
        for z in (0.4, 2.0):
            assert e.measure.laplace(z) == pytest.approx(complex(delta(phi, 1.3, z)), abs=1e-11)

    @pytest.mark.parametrize("phi", PHIS, ids=lambda p: p.name)
    @pytest.mark.parametrize("t", [0.5, 3.0])
    def test_second_order_kernel(self, phi, t):
        k = delta_kernel(phi, t)
        assert np.all(k(np.linspace(0.01, 30, 500)) >= -1e-15)
        for z in (0.5, 1.0 + 1.0j):
            lt = quad(lambda s: float(k(np.array([s]))[0] * np.exp(-z.real * s) * np.cos(z.imag * s)),
                      0, math.inf, points=None, limit=400)[0]
            lt -= 1j * quad(lambda s: float(k(np.array([s]))[0] * np.exp(-z.real * s) * np.sin(z.imag * s)),
                            0, math.inf, limit=400)[0]
            assert lt == pytest.approx(complex(delta(phi, t, z) / z ** 2), rel=1e-7)

    def test_euler_kernel_closed_form(self):
        # Gamma(t) subordinator: G_t(s) = s P(t, s) - t P(t+1, s) for s <= t
        t, s = 2.0, 1.2
        want = s * gammainc(t, s) - t * gammainc(t + 1, s)
        assert float(delta_kernel_density(EULER, t, s)) == pytest.approx(want, rel=1e-14)

    def test_identity_is_zero(self):
        assert delta_kernel(IDENTITY, 1.0).integral() == 0.0

    def test_moments(self):
        # Gamma(t): mean t, second raw moment t(t+1)
        m = raw_moments(EULER, 2.5, 3)
        assert m[1] == pytest.approx(2.5) and m[2] == pytest.approx(2.5 * 3.5)


class TestFractional:
    def test_first_order_density_is_distribution_function(self):
        # z^{-1} Delta_t for log(1+z): P(t, s) - 1{s >= t}
        s = np.array([0.3, 1.7, 4.0, 9.0])
        t = 2.0
        want = gammainc(t, s) - (s >= t)
        np.testing.assert_allclose(fractional_delta_density(EULER, t, 1.0, s), want, atol=1e-13)

    def test_first_order_norm_closed_form(self):
        # int_0^1 (1 - e^{-s}) ds + int_1^inf e^{-s} ds = 2/e
        for phi in (DUNFORD_SEGAL, EULER):
            assert fractional_delta(phi, 1.0, 1.0).norm() == pytest.approx(2 / math.e, abs=1e-11)

    # frozen from an mpmath quadrature of the hypergeometric regular part
    # minus the singular term at s = t, split at its sign changes
    @pytest.mark.parametrize("t,alpha,want", [
        (2.0, 0.5, 1.3745996660),
        (5.0, 0.5, 1.7279921917),
        (0.5, 1.5, 0.3282098928),
        (2.0, 1.5, 1.0758912567),
    ])
    def test_euler_against_oracle(self, t, alpha, want):
        assert fractional_delta(EULER, t, alpha).norm() == pytest.approx(want, rel=2e-9)

    def test_alpha_two_matches_kernel(self):
        a = fractional_delta(YOSIDA, 1.0, 2.0).norm()
        assert a == pytest.approx(1.0, abs=1e-10)

    def test_custom_rejected(self):
        phi = BernsteinFunction.custom(LevyTriple.from_json({"a": 0, "b": 0, "atoms": [[1.0, 1.0]]}))
        with pytest.raises(UnsupportedKind):
            fractional_delta(phi, 1.0, 0.5)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            fractional_delta(EULER, 1.0, 2.5)


class TestBounds:
    def test_interpolation_bound_endpoints(self):
        assert interpolation_bound(3.0, 5.0, 2.0, 0.0) == pytest.approx(4 * 3.0)
        assert interpolation_bound(3.0, 5.0, 2.0, 2.0) == pytest.approx(4 * C2 * 5.0)

    def test_relaxed_bound(self):
        b = delta_fractional_bounds(YOSIDA, 2.0, 1.0)
        assert b.relaxed == pytest.approx(8 * math.sqrt(4.0))
        assert b.b == pytest.approx(2.0)

    def test_scaled(self):
        d, e = scaled_delta_bounds(DUNFORD_SEGAL, 4.0, 16, 2.0)
        assert (d, e) == pytest.approx((8 * 4 / 16, 8 * 16 / 16))
