"""Quadrature and measure-algebra primitives against closed forms."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from semirate.errors import QuadratureError
from semirate.measures import A1Element, HalfLineMeasure, Tail, a1_norm, convolve
from semirate.quadrature import gauss_kronrod, gauss_legendre_panels


class TestGaussKronrod:
    def test_polynomial_exact(self):
        v, e = gauss_kronrod(lambda x: 3 * x ** 2, 0.0, 2.0)
        assert v == pytest.approx(8.0, abs=1e-13)

    def test_infinite_interval(self):
        v, _ = gauss_kronrod(lambda x: np.exp(-x), 0.0, math.inf, abs_tol=1e-13)
        assert v == pytest.approx(1.0, abs=1e-12)

    def test_heavy_tail(self):
        # int_1^inf x^{-1.5} dx = 2
        v, _ = gauss_kronrod(lambda x: x ** -1.5, 1.0, math.inf, abs_tol=1e-9, rel_tol=1e-9)
        assert v == pytest.approx(2.0, rel=1e-8)

    def test_reversed_limits(self):
        v, _ = gauss_kronrod(np.sin, math.pi, 0.0)
        assert v == pytest.approx(-2.0, abs=1e-12)

    def test_complex_integrand(self):
        v, _ = gauss_kronrod(lambda x: np.exp(1j * x), 0.0, math.pi)
        assert v == pytest.approx(2j, abs=1e-12)

    def test_singular_endpoint_against_scipy(self):
        f = lambda x: np.log(x) * np.sqrt(x)
        v, _ = gauss_kronrod(f, 0.0, 1.0, abs_tol=1e-11, rel_tol=1e-11)
        assert v == pytest.approx(quad(lambda x: math.log(x) * math.sqrt(x), 0, 1)[0], abs=1e-10)

    def test_failure_raises(self):
        with pytest.raises(QuadratureError) as exc:
            gauss_kronrod(lambda x: np.sin(1 / x) / x, 0.0, 1.0, max_intervals=50, max_rounds=5)
        assert exc.value.achieved > 0

    def test_legendre_panels(self):
        v, e = gauss_legendre_panels(np.cos, np.linspace(0, math.pi / 2, 5))
        assert v == pytest.approx(1.0, abs=1e-14) and e < 1e-12


class TestHalfLineMeasure:
    def test_atoms_merge_and_mass(self):
        m = HalfLineMeasure(atoms=((1.0, 0.5), (1.0, 0.25), (2.0, -1.0)))
        assert m.atoms == ((1.0, 0.75), (2.0, -1.0))
        assert m.mass() == pytest.approx(-0.25)
        assert m.total_variation()[0] == pytest.approx(1.75)

    def test_exponential_density(self):
        m = HalfLineMeasure(density=lambda s: np.exp(-s))
        assert m.mass() == pytest.approx(1.0, abs=1e-12)
        assert m.moment(2) == pytest.approx(2.0, rel=1e-10)
        assert m.laplace(1.0) == pytest.approx(0.5, abs=1e-12)

    def test_signed_density_total_variation(self):
        # e^{-s}(1 - s) integrates to 0 with |.| mass 2/e
        m = HalfLineMeasure(density=lambda s: np.exp(-s) * (1 - s))
        assert m.sign_change_points() == pytest.approx([1.0], abs=1e-10)
        assert m.total_variation()[0] == pytest.approx(2 / math.e, abs=1e-11)

    def test_tail_contributes(self):
        tail = Tail(start=5.0, integral=-0.1, abs_integral=0.1, error=0.0)
        m = HalfLineMeasure(density=lambda s: np.where(s < 5, 0.2, 0.0), breakpoints=(5.0,),
                            support_end=5.0, tail=tail)
        assert m.total_variation()[0] == pytest.approx(1.1, abs=1e-11)

    def test_singular_term(self):
        # w (s - x)_+^{alpha-1}/Gamma(alpha) on [0, b] integrates to w (b-x)^alpha/Gamma(alpha+1)
        m = HalfLineMeasure(singular=((1.0, 2.0),), order=0.5, support_end=3.0)
        assert m._singular_integral(0.0, 3.0) == pytest.approx(2.0 * 2 ** 0.5 / math.gamma(1.5))

    def test_scaled_and_sum(self):
        a = HalfLineMeasure.atom(1.0)
        b = HalfLineMeasure(density=lambda s: np.exp(-s))
        c = (a + b).scaled(2.0)
        assert c.mass() == pytest.approx(4.0, abs=1e-11)
        assert (c - c).total_variation()[0] == pytest.approx(0.0, abs=1e-11)


class TestAlgebra:
    def test_convolution_of_exponentials(self):
        # Exp(1) * Exp(1) = Gamma(2): transform 1/(z+1)^2
        e = HalfLineMeasure(density=lambda s: np.exp(-s))
        g = convolve(e, e)
        for s in (0.3, 1.0, 4.0):
            assert float(g.density(np.array([s]))[0]) == pytest.approx(s * math.exp(-s), rel=1e-10)

    def test_convolution_atoms_and_shift(self):
        a = HalfLineMeasure(atoms=((1.0, 2.0),))
        e = HalfLineMeasure(density=lambda s: np.exp(-s))
        g = convolve(a, e)
        assert g.laplace(0.5) == pytest.approx(2 * math.exp(-0.5) / 1.5, rel=1e-9)

    def test_element_product_and_norm(self):
        e = A1Element(HalfLineMeasure(density=lambda s: np.exp(-s)), lambda z: 1 / (z + 1))
        p = e * e
        assert p(2.0) == pytest.approx(1 / 9)
        assert a1_norm(p) == pytest.approx(1.0, abs=1e-9)
