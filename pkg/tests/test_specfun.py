"""Special functions against mpmath and scipy oracles."""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy.special import eval_genlaguerre

from semirate.specfun import (
    build_cbeta_table, c_beta, c_beta_estimate, kummer_1F1, kummer_1F1_scaled, laguerre_L0,
    laguerre_L1, laguerre_abs_mean, laguerre_roots, laguerre_sq_mean_01, q_beta, q_beta_sign_changes,
    q_beta_tail, watson_identity_residual,
)

mp.mp.dps = 40


def _laguerre1_poly(k, x):
    """Explicit coefficient sum for the generalized Laguerre polynomial of order 1."""
    return mp.fsum((-1) ** i * mp.binomial(k + 1, k - i) * x ** i / mp.factorial(i) for i in range(k + 1))


class TestLaguerre:
    @pytest.mark.parametrize("k", [0, 1, 2, 5, 17, 29])
    def test_against_scipy(self, k):
        s = np.linspace(0.0, 40.0, 81)
        np.testing.assert_allclose(laguerre_L1(k, s), eval_genlaguerre(k, 1, s), rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(laguerre_L0(k, s), eval_genlaguerre(k, 0, s), rtol=1e-10, atol=1e-10)

    @pytest.mark.parametrize("k", [1, 4, 12, 29])
    def test_roots_are_zeros(self, k):
        r = laguerre_roots(k)
        assert len(r) == k and np.all(np.diff(r) > 0)
        for x in r:
            exact = mp.findroot(lambda u: _laguerre1_poly(k, u), mp.mpf(float(x)), verify=False)
            assert float(x) == pytest.approx(float(exact), rel=1e-13)

    @pytest.mark.parametrize("m", [1, 2, 3, 7, 15])
    def test_abs_mean_quadrature(self, m):
        roots = [0] + [mp.mpf(float(x)) for x in laguerre_roots(m - 1)] + [mp.inf]
        f = lambda s: mp.e ** (-s) * abs(mp.laguerre(m - 1, 1, s))
        assert laguerre_abs_mean(m) == pytest.approx(float(mp.quad(f, roots)), rel=1e-12)

    @pytest.mark.parametrize("m", [1, 5, 30])
    def test_sq_mean(self, m):
        f = lambda s: mp.e ** (-s) * mp.laguerre(m - 1, 1, s) ** 2
        assert laguerre_sq_mean_01(m) == pytest.approx(float(mp.quad(f, [0, 1])), rel=1e-12)


class TestKummer:
    @pytest.mark.parametrize("a,b,s", [
        (-1.5, 2.0, 3.0), (-0.5, 2.0, 50.0), (-4.0, 2.0, 7.5), (0.3, 2.0, -12.0),
        (-7.25, 2.0, 120.0), (-2.5, 2.0, 900.0), (1.5, 3.0, 20.0),
    ])
    def test_against_mpmath(self, a, b, s):
        want = float(mp.hyp1f1(a, b, s))
        assert float(kummer_1F1(a, b, s)) == pytest.approx(want, rel=1e-11, abs=1e-300)

    @pytest.mark.parametrize("a,s", [(-1.5, 10.0), (-0.5, 800.0), (-9.5, 300.0)])
    def test_scaled(self, a, s):
        want = float(mp.e ** (-s) * mp.hyp1f1(a, 2, s))
        assert float(kummer_1F1_scaled(a, 2.0, s)) == pytest.approx(want, rel=1e-11)


class TestQBeta:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 2.5, 3.0, 6.75])
    @pytest.mark.parametrize("s", [0.01, 0.5, 3.0, 25.0, 200.0])
    def test_formula(self, beta, s):
        want = float(beta * mp.e ** (-s) * mp.hyp1f1(1 - beta, 2, s))
        assert float(q_beta(beta, s)) == pytest.approx(want, rel=1e-10, abs=1e-290)

    @pytest.mark.parametrize("beta", [0.5, 2.5, 4.0])
    def test_laplace_transform(self, beta):
        # int e^{-zs} q_beta(s) ds = 1 - (z/(z+1))^beta
        z = 1.5
        f = lambda s: mp.e ** (-z * s) * beta * mp.e ** (-s) * mp.hyp1f1(1 - beta, 2, s)
        val = float(mp.quad(f, [0, 5, 20, mp.inf]))
        assert val == pytest.approx(1 - (z / (z + 1)) ** beta, rel=1e-12)

    @pytest.mark.parametrize("beta", [1.5, 2.5, 3.25])
    def test_tail(self, beta):
        S = 60.0
        val, err = q_beta_tail(beta, S)
        want = float(mp.quad(lambda s: beta * mp.e ** (-s) * mp.hyp1f1(1 - beta, 2, s), [S, 2 * S, mp.inf]))
        assert val == pytest.approx(want, rel=1e-8, abs=1e-30)
        assert err >= 0

    def test_sign_changes_integer(self):
        assert q_beta_sign_changes(3.0, 100.0) == pytest.approx(list(laguerre_roots(2)))

    def test_sign_changes_fractional(self):
        roots = q_beta_sign_changes(3.5, 100.0)
        for r in roots:
            assert abs(float(q_beta(3.5, r))) < 1e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            q_beta(0.0, 1.0)


class TestCBeta:
    def test_c2_closed_form(self):
        assert c_beta(2.0) == pytest.approx(2 * (1 + math.exp(-2)), abs=1e-14)

    def test_below_one(self):
        assert c_beta(0.4) == 2.0

    # frozen from mpmath quadrature between sign changes
    @pytest.mark.parametrize("beta", [2.5, 3.0, 5.5])
    def test_against_mpmath(self, beta):
        q = lambda s: beta * mp.e ** (-s) * mp.hyp1f1(1 - beta, 2, s)
        cuts = [0] + [mp.mpf(r) for r in q_beta_sign_changes(beta, 200.0)] + [mp.inf]
        want = 1 + sum(abs(mp.quad(q, [a, b])) for a, b in zip(cuts[:-1], cuts[1:]))
        value, err = c_beta_estimate(beta)
        assert value == pytest.approx(float(want), abs=max(err, 1e-10))

    def test_frozen_values(self):
        assert c_beta(3.0) == pytest.approx(2.46014, abs=1e-5)
        assert c_beta(10.0) == pytest.approx(3.1705, abs=1e-4)

    def test_table(self):
        tab = build_cbeta_table([1.0, 1.5, 2.0])
        assert tab.all_ok and [e.beta for e in tab.rows()] == [1.0, 1.5, 2.0]


class TestWatson:
    @pytest.mark.parametrize("m", [1, 3, 5])
    def test_residual_small(self, m):
        assert watson_identity_residual(m, 0.7) < 1e-12

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            watson_identity_residual(0, 1.0)
