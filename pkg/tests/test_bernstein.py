"""Bernstein functions, Levy triples and subordination measures."""

import json
import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from semirate.bernstein import (
    BUILTINS, DUNFORD_SEGAL, EULER, IDENTITY, YOSIDA, BernsteinFunction, Kind, LevyTriple,
    bounded_bernstein_norm, by_name, derivatives_at_zero, eval_phi, expm1c, is_in_phi, log1pc,
    subordination_measure, yosida_density,
)
from semirate.errors import ConfigError, UnboundedFunction, UnsupportedKind

def _mp(f):
    # componentwise mpmath oracle, accurate near 0 where complex expm1/log1p lose digits
    return lambda z: np.array([complex(f(mpmath.mpc(w))) for w in np.ravel(z)]).reshape(np.shape(z))


CLOSED = {
    "yosida": lambda z: z / (z + 1),
    "dunford-segal": _mp(lambda w: -mpmath.expm1(-w)),
    "euler": _mp(lambda w: mpmath.log1p(w)),
    "identity": lambda z: z,
}


class TestEvaluation:
    @pytest.mark.parametrize("name", sorted(CLOSED))
    def test_closed_forms(self, name):
        z = np.array([0.0, 1e-9, 0.5, 3.0, 2 + 5j, 1e-3 - 40j])
        np.testing.assert_allclose(eval_phi(by_name(name), z), CLOSED[name](z), rtol=1e-14)

    @pytest.mark.parametrize("phi", [YOSIDA, DUNFORD_SEGAL, EULER])
    def test_levy_khintchine(self, phi):
        # phi(z) = int (1 - e^{-zs}) mu(ds) against scipy quadrature of the triple
        mu = phi.triple.mu
        for z in (0.3, 2.0):
            val = sum(w * (1 - math.exp(-z * x)) for x, w in mu.atoms)
            if mu.density is not None:
                val += quad(lambda s: (1 - math.exp(-z * s)) * float(mu.density(np.array([s]))[0]),
                            0, math.inf, limit=200)[0]
            assert val == pytest.approx(float(np.real(eval_phi(phi, z))), rel=1e-9)

    def test_rejects_left_half_plane(self):
        with pytest.raises(ValueError):
            eval_phi(EULER, -0.5)

    @pytest.mark.parametrize("phi", [YOSIDA, DUNFORD_SEGAL, EULER])
    def test_derivative_finite_difference(self, phi):
        for z in (0.1, 1.0, 4.0):
            h = 1e-6
            fd = (eval_phi(phi, z + h) - eval_phi(phi, z - h)) / (2 * h)
            assert float(np.real(phi.derivative(z))) == pytest.approx(float(np.real(fd)), rel=1e-8)


class TestClassPhi:
    @pytest.mark.parametrize("phi,d2", [(YOSIDA, -2.0), (DUNFORD_SEGAL, -1.0), (EULER, -1.0), (IDENTITY, 0.0)])
    def test_derivatives_at_zero(self, phi, d2):
        d = derivatives_at_zero(phi)
        assert d.phi0 == 0.0 and d.d1 == 1.0 and d.d2 == d2 and d.finite
        assert is_in_phi(phi)

    def test_bounded_norm(self):
        assert bounded_bernstein_norm(YOSIDA) == pytest.approx(2.0)
        assert bounded_bernstein_norm(DUNFORD_SEGAL) == pytest.approx(2.0)
        for phi in (EULER, IDENTITY):
            with pytest.raises(UnboundedFunction):
                bounded_bernstein_norm(phi)

    def test_by_name(self):
        assert by_name("euler") is EULER and set(BUILTINS) == set(CLOSED)
        with pytest.raises(ConfigError):
            by_name("pade")


class TestCustom:
    def test_unit_atom_matches_dunford_segal(self, tmp_path):
        path = tmp_path / "phi.json"
        path.write_text(json.dumps({"a": 0, "b": 0, "atoms": [[1.0, 1.0]]}))
        phi = BernsteinFunction.custom(LevyTriple.from_json(path))
        z = np.array([0.2, 1.0, 3 + 2j])
        np.testing.assert_allclose(eval_phi(phi, z), 1 - np.exp(-z), rtol=1e-13)
        d = derivatives_at_zero(phi)
        assert (d.phi0, d.d1, d.d2) == pytest.approx((0.0, 1.0, -1.0))

    def test_density_triple(self):
        grid = np.linspace(0, 30, 3001)
        doc = {"a": 0, "b": 0, "density": {"grid": grid.tolist(), "values": (4 * np.exp(-2 * grid)).tolist()}}
        phi = BernsteinFunction.custom(LevyTriple.from_json(doc))
        d = derivatives_at_zero(phi)
        assert d.d1 == pytest.approx(1.0, rel=1e-4) and d.d2 == pytest.approx(-1.0, rel=1e-4)
        # 4 int (1-e^{-zs}) e^{-2s} ds = 2z/(z+2)
        assert float(np.real(eval_phi(phi, 1.0))) == pytest.approx(2 / 3, rel=1e-4)

    @pytest.mark.parametrize("doc", [
        {"a": -1, "b": 0},
        {"a": 0, "b": 0, "atoms": [[-1.0, 1.0]]},
        {"a": 0, "b": 0, "atoms": [[1.0, -1.0]]},
        "not json",
    ])
    def test_invalid(self, doc):
        with pytest.raises(ConfigError):
            LevyTriple.from_json(doc)


class TestSubordination:
    @pytest.mark.parametrize("phi", [YOSIDA, DUNFORD_SEGAL, EULER])
    @pytest.mark.parametrize("t", [0.3, 1.0, 7.0])
    def test_laplace_transform(self, phi, t):
        nu = subordination_measure(phi, t)
        for z in (0.5, 2.0):
            assert nu.measure.laplace(z) == pytest.approx(math.exp(-t * float(np.real(eval_phi(phi, z)))),
                                                          rel=1e-10)

    def test_yosida_density_series(self):
        # e^{-t-s} sum_k t^k s^{k-1} / (k! (k-1)!)
        t, s = 2.0, 3.0
        series = math.exp(-t - s) * sum(t ** k * s ** (k - 1) / (math.factorial(k) * math.factorial(k - 1))
                                        for k in range(1, 60))
        assert float(yosida_density(t, s)) == pytest.approx(series, rel=1e-13)
        assert float(yosida_density(t, 0.0)) == pytest.approx(t * math.exp(-t))

    def test_unsupported(self):
        with pytest.raises(UnsupportedKind):
            subordination_measure(IDENTITY, 1.0)
        assert Kind("euler") is Kind.EULER


class TestComplexElementary:
    """Complex ``expm1``/``log1p`` keep relative accuracy near 0."""

    Z = [1e-6, -1e-6, 1e-7j, 1e-8 + 1e-8j, -3e-9 - 2e-7j, 0.5 + 2j, -2 + 30j]

    @pytest.mark.parametrize("z", Z)
    def test_expm1c(self, z):
        want = complex(mpmath.expm1(mpmath.mpc(z)))
        assert abs(complex(expm1c(z)) - want) <= 1e-14 * abs(want)

    @pytest.mark.parametrize("z", Z)
    def test_log1pc(self, z):
        want = complex(mpmath.log1p(mpmath.mpc(z)))
        got = complex(log1pc(z))
        assert abs(got.real - want.real) <= 1e-14 * abs(want.real) + 1e-300
        assert abs(got.imag - want.imag) <= 1e-14 * abs(want.imag) + 1e-300
