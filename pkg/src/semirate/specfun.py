"""Laguerre polynomials, Kummer's function and the interpolation constants c_beta.

The kernel ``q_beta(s) = beta * exp(-s) * 1F1(1 - beta; 2; s)`` is the density
of ``1 - (z/(z+1))**beta``.  For integer ``beta = m`` it reduces to
``exp(-s) * L^{(1)}_{m-1}(s)``, which gives exact sign splits through the
Laguerre roots and an exact antiderivative through ``L^{(0)}_{m-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, rgamma, roots_genlaguerre

from .errors import QuadratureError, SeriesError
from .quadrature import gauss_kronrod

SERIES_LIMIT = 600.0
MAX_TERMS = 4000
_EPS = np.finfo(float).eps


# -- Laguerre polynomials ---------------------------------------------------

def _laguerre(k: int, s, alpha: int):
    s = np.asarray(s, dtype=float)
    prev = np.ones_like(s)
    if k == 0:
        return prev
    cur = 1.0 + alpha - s
    for n in range(1, k):
        prev, cur = cur, ((2 * n + 1 + alpha - s) * cur - (n + alpha) * prev) / (n + 1)
    return cur


def laguerre_L1(k: int, s):
    """Generalized Laguerre polynomial ``L^{(1)}_k(s)`` by three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return _laguerre(k, s, 1)


def laguerre_L0(k: int, s):
    """Ordinary Laguerre polynomial ``L_k(s)``; ``-exp(-s) L_k`` is an antiderivative
    of ``exp(-s) L^{(1)}_k``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return _laguerre(k, s, 0)


def laguerre_roots(k: int) -> np.ndarray:
    """Real roots of ``L^{(1)}_k`` (Golub-Welsch nodes, Newton polished)."""
    if k == 0:
        return np.empty(0)
    x, _ = roots_genlaguerre(k, 1.0)
    x = np.sort(np.asarray(x, dtype=float))
    for _ in range(3):
        # d/ds L^{(1)}_k = -L^{(2)}_{k-1}
        deriv = -_laguerre(k - 1, x, 2) if k > 1 else -np.ones_like(x)
        x = x - laguerre_L1(k, x) / deriv
    return x


# -- Kummer's confluent hypergeometric function -----------------------------

def _neumaier_series(a: float, b: float, s: np.ndarray) -> np.ndarray:
    """Ascending series with compensated accumulation, vectorized over ``s``."""
    term = np.ones_like(s)
    total = np.ones_like(s)
    comp = np.zeros_like(s)
    for k in range(MAX_TERMS):
        term = term * (a + k) / (b + k) * s / (k + 1)
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        # terms stop shrinking only once k exceeds s - a; check after that point
        if k > -a and np.all(np.abs(term) <= _EPS * 1e-2 * np.abs(total + comp)):
            return total + comp
    raise SeriesError(f"1F1({a}; {b}; s) series did not converge in {MAX_TERMS} terms")


def _scaled_asymptotic(a: float, b: float, s: np.ndarray) -> np.ndarray:
    """``exp(-s) 1F1(a; b; s)`` for large positive ``s`` (dominant exponential part)."""
    coef = math.exp(gammaln(b)) * rgamma(a) if b < 170 else np.exp(gammaln(b) - gammaln(a))
    term = np.ones_like(s)
    total = np.ones_like(s)
    for k in range(200):
        nxt = term * (b - a + k) * (1 - a + k) / ((k + 1) * s)
        if np.all(np.abs(nxt) >= np.abs(term)) and k > 0:
            break
        term = nxt
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    else:
        raise SeriesError("asymptotic expansion did not settle")
    return coef * s ** (a - b) * total


def kummer_1F1(a: float, b: float, s):
    """Confluent hypergeometric ``M(a; b; s)``, vectorized over ``s``.

    Terminating series for nonpositive integer ``a``; Kummer's transformation
    for negative ``s``; compensated ascending series up to ``s = 600``;
    asymptotic expansion beyond.
    """
    if b <= 0 and float(b).is_integer():
        raise ValueError("b must not be a nonpositive integer")
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    out = np.empty_like(s_arr)
    if a == 0:
        out[:] = 1.0
    elif a < 0 and float(a).is_integer():
        n = int(-a)
        term = np.ones_like(s_arr)
        total = np.ones_like(s_arr)
        for k in range(n):
            term = term * (a + k) / (b + k) * s_arr / (k + 1)
            total = total + term
        out[:] = total
    else:
        neg = s_arr < 0
        if neg.any():
            out[neg] = np.exp(s_arr[neg]) * kummer_1F1(b - a, b, -s_arr[neg])
        mid = ~neg & (s_arr <= SERIES_LIMIT)
        if mid.any():
            out[mid] = _neumaier_series(a, b, s_arr[mid])
        far = ~neg & ~mid
        if far.any():
            with np.errstate(over="ignore"):
                out[far] = np.exp(s_arr[far]) * _scaled_asymptotic(a, b, s_arr[far])
    return out[0] if scalar else out


def kummer_1F1_scaled(a: float, b: float, s):
    """``exp(-s) M(a; b; s)`` for ``s >= 0`` without overflow."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s_arr)
    mid = s_arr <= SERIES_LIMIT
    if mid.any():
        out[mid] = np.exp(-s_arr[mid]) * kummer_1F1(a, b, s_arr[mid])
    if (~mid).any():
        if a <= 0 and float(a).is_integer():
            # polynomial times exp(-s): evaluate in log space
            p = kummer_1F1(a, b, s_arr[~mid])
            out[~mid] = np.sign(p) * np.exp(np.log(np.abs(p)) - s_arr[~mid])
        else:
            out[~mid] = _scaled_asymptotic(a, b, s_arr[~mid])
    return out if np.ndim(s) else out[0]


# -- the kernel q_beta ------------------------------------------------------

def _is_int(beta: float) -> bool:
    return float(beta).is_integer()


def q_beta(beta: float, s):
    """Density of ``1 - (z/(z+1))**beta``: ``beta e^{-s} 1F1(1-beta; 2; s)``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    s_arr = np.asarray(s, dtype=float)
    if _is_int(beta):
        m = int(beta)
        with np.errstate(over="ignore", invalid="ignore"):
            p = laguerre_L1(m - 1, s_arr)
            return np.where(np.abs(s_arr) < 700, np.exp(-s_arr) * p,
                            np.sign(p) * np.exp(np.log(np.abs(p) + 1e-300) - s_arr))
    return beta * kummer_1F1_scaled(1.0 - beta, 2.0, s_arr)


def q_beta_tail(beta: float, S: float, terms: int = 60) -> tuple[float, float]:
    """``(int_S^inf q_beta, error)`` from the large-``s`` expansion.

    ``q_beta(s) ~ beta/Gamma(1-beta) s^{-1-beta} sum_k (1+beta)_k (beta)_k / k! s^{-k}``;
    beyond the last sign change the integrand has constant sign, so the
    absolute tail is the modulus of the signed one.
    """
    if _is_int(beta):
        # exponentially small: bound |L| e^{-s} crudely by its value at S times e^{-S}
        m = int(beta)
        tail = float(laguerre_L0(m - 1, S)) * math.exp(-S)
        return tail, 0.0
    lead = beta * float(rgamma(1.0 - beta))
    coef = 1.0
    total = 0.0
    last = math.inf
    for k in range(terms):
        term = coef * S ** (-beta - k) / (beta + k)
        if abs(term) > last:
            break
        total += term
        last = abs(term)
        coef *= (1 + beta + k) * (beta + k) / (k + 1)
        if last <= 1e-17 * abs(total):
            break
    return lead * total, abs(lead) * last


# -- interpolation constants --------------------------------------------------

def laguerre_abs_mean(m: int) -> float:
    """``int_0^inf e^{-s} |L^{(1)}_{m-1}(s)| ds`` using exact root splits."""
    if m < 1:
        raise ValueError("m must be >= 1")
    edges = np.concatenate([[0.0], laguerre_roots(m - 1)])
    prim = np.exp(-edges) * laguerre_L0(m - 1, edges)
    # the antiderivative vanishes at infinity
    pieces = np.append(prim[:-1] - prim[1:], prim[-1])
    return float(np.sum(np.abs(pieces)))


def laguerre_sq_mean_01(m: int, order: int = 64) -> float:
    """``int_0^1 e^{-s} L^{(1)}_{m-1}(s)^2 ds`` by Gauss-Legendre."""
    x, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    return float(0.5 * np.sum(w * np.exp(-s) * laguerre_L1(m - 1, s) ** 2))


def q_beta_sign_changes(beta: float, upto: float) -> list[float]:
    """Positive zeros of ``q_beta`` on ``(0, upto)``."""
    if _is_int(beta):
        return [float(r) for r in laguerre_roots(int(beta) - 1) if r < upto]
    if beta <= 1:
        return []
    grid = np.linspace(0.0, upto, 8192)[1:]
    vals = q_beta(beta, grid)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(brentq(lambda u: float(q_beta(beta, u)), grid[i], grid[i + 1], xtol=1e-14))
    return roots


def _cutoff(beta: float) -> float:
    return min(max(50.0, 4.0 * (beta + 1.0) ** 2), 590.0)


def c_beta_estimate(beta: float) -> tuple[float, float]:
    """``(c_beta, error)`` where ``c_beta = 1 + int_0^inf |q_beta|``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if _is_int(beta):
        return 1.0 + laguerre_abs_mean(int(beta)), 1e-15 * beta
    if beta < 1:
        # q_beta is positive with unit mass
        return 2.0, 0.0
    S = _cutoff(beta)
    cuts = [0.0, *q_beta_sign_changes(beta, S), S]
    total, err = 0.0, 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = gauss_kronrod(lambda u: q_beta(beta, u), lo, hi, abs_tol=1e-13, rel_tol=1e-12)
        total += abs(v)
        err += e
    tail, tail_err = q_beta_tail(beta, S)
    return 1.0 + total + abs(tail), err + tail_err


def c_beta(beta: float) -> float:
    """Norm of ``(z/(z+1))**beta`` in the measure algebra."""
    return c_beta_estimate(beta)[0]


@dataclass(frozen=True)
class CbetaEntry:
    beta: float
    value: float
    err: float
    upper_bound: float

    @property
    def ok(self) -> bool:
        return 1.0 - self.err <= self.value <= self.upper_bound + self.err


@dataclass
class CbetaTable:
    entries: dict[float, CbetaEntry] = field(default_factory=dict)

    def rows(self) -> list[CbetaEntry]:
        return [self.entries[b] for b in sorted(self.entries)]

    @property
    def all_ok(self) -> bool:
        return all(e.ok for e in self.entries.values())


def build_cbeta_table(betas) -> CbetaTable:
    table = CbetaTable()
    for beta in betas:
        beta = float(beta)
        value, err = c_beta_estimate(beta)
        table.entries[beta] = CbetaEntry(beta, value, err, 2.0 ** (beta + 1.0))
    return table


# -- Watson's product formula ----------------------------------------------

def watson_identity_residual(m: int, s: float, order: int = 400) -> float:
    """Residual of Watson's integral representation of ``e^{-s} L^{(1)}_{m-1}(s)^2``."""
    if m < 1 or s <= 0:
        raise ValueError("need m >= 1 and s > 0")
    lhs = math.pi / (2 * m) * math.exp(-s) * float(laguerre_L1(m - 1, s)) ** 2
    x, w = np.polynomial.legendre.leggauss(order)
    theta = 0.5 * math.pi * (x + 1.0)
    c2 = np.cos(0.5 * theta) ** 2
    integrand = (laguerre_L1(m - 1, 4 * s * c2) * np.exp(-2 * s * c2)
                 * np.sin(s * np.sin(theta)) / s * np.sin(theta))
    rhs = 0.5 * math.pi * float(np.sum(w * integrand))
    return abs(lhs - rhs)


__all__ = [
    "laguerre_L1", "laguerre_L0", "laguerre_roots", "kummer_1F1", "kummer_1F1_scaled",
    "q_beta", "q_beta_tail", "laguerre_abs_mean", "laguerre_sq_mean_01", "c_beta",
    "c_beta_estimate", "CbetaEntry", "CbetaTable", "build_cbeta_table",
    "watson_identity_residual", "QuadratureError",
]
