"""Concrete elements of the measure algebra on the half-line.

Provides the kernels ``u_{beta,tau} = (z/(z+tau))**beta``,
``v_{beta,tau} = (z+tau)**-beta``, the difference
``Delta_t(z) = exp(-t phi(z)) - exp(-t z)`` and its fractional quotients
``z**-alpha Delta_t(z)``, together with the interpolation estimates that bound
their norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import binom, gammainc, gammaincc, gammaln

from .bernstein import BernsteinFunction, Kind, derivatives_at_zero, subordination_measure
from .errors import UnsupportedKind
from .measures import A1Element, HalfLineMeasure, Tail, a1_norm
from .quadrature import gauss_kronrod
from .specfun import c_beta, kummer_1F1_scaled, q_beta, q_beta_sign_changes, q_beta_tail

C1 = 2.0
C2 = 2.0 * (1.0 + math.exp(-2.0))


def _check_alpha(alpha: float, hi: float = 2.0):
    if not 0.0 <= alpha <= hi:
        raise ValueError(f"alpha must lie in [0, {hi}], got {alpha}")


# -- u and v ------------------------------------------------------------------

def make_u(beta: float, tau: float) -> A1Element:
    """``(z/(z+tau))**beta`` as ``delta_0`` minus the density ``tau q_beta(tau s)``."""
    if beta <= 0 or tau <= 0:
        raise ValueError("beta and tau must be positive")
    end = min(max(50.0, 4.0 * (beta + 1.0) ** 2), 590.0)
    roots = tuple(r / tau for r in q_beta_sign_changes(beta, end))
    tail = None
    if not float(beta).is_integer():
        signed, err = q_beta_tail(beta, end)
        tail = Tail(end / tau, -signed, abs(signed), err)
    m = HalfLineMeasure(
        atoms=((0.0, 1.0),),
        density=lambda s: -tau * q_beta(beta, tau * np.asarray(s, dtype=float)),
        breakpoints=roots,
        scan=(1e-8 / tau, end / tau),
        tail=tail,
    )
    return A1Element(m, lambda z: (z / (z + tau)) ** beta, f"u({beta},{tau})")


def make_v(beta: float, tau: float) -> A1Element:
    """``(z+tau)**-beta``: the density ``e^{-tau s} s^{beta-1}/Gamma(beta)``."""
    if beta <= 0 or tau <= 0:
        raise ValueError("beta and tau must be positive")

    def dens(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp((beta - 1.0) * np.log(s) - tau * s - gammaln(beta))

    m = HalfLineMeasure(density=dens, breakpoints=(1.0 / tau,), scan=(1e-8, 60.0 / tau))
    return A1Element(m, lambda z: (z + tau) ** (-beta), f"v({beta},{tau})")


# -- Delta_t and its kernels ----------------------------------------------------

def _require_closed_form(phi: BernsteinFunction):
    if phi.kind in (Kind.CUSTOM,):
        raise UnsupportedKind("closed-form subordination measure required")


def _delta_transform(phi: BernsteinFunction, t: float):
    return lambda z: np.exp(-t * phi(z)) - np.exp(-t * np.asarray(z, dtype=complex))


def delta_measure(phi: BernsteinFunction, t: float) -> A1Element:
    """``Delta_t = e^{-t phi} - e^{-tz}`` as the measure ``nu_t - delta_t``."""
    _require_closed_form(phi)
    if phi.kind is Kind.IDENTITY:
        return A1Element(HalfLineMeasure(), lambda z: np.zeros_like(np.asarray(z, dtype=complex)))
    nu = subordination_measure(phi, t).measure
    m = HalfLineMeasure(
        atoms=nu.atoms + ((t, -1.0),),
        density=nu.density,
        breakpoints=nu.breakpoints,
        scan=nu.scan,
    )
    return A1Element(m, _delta_transform(phi, t), f"Delta({phi.name},{t})")


@dataclass(frozen=True)
class DeltaKernel:
    """``z**-2 Delta_t(z) = int e^{-zs} G_t(s) ds`` with ``G_t >= 0``."""

    phi: BernsteinFunction
    t: float

    def __call__(self, s):
        return delta_kernel_density(self.phi, self.t, s)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.phi.kind is Kind.DUNFORD_SEGAL:
            nu = subordination_measure(self.phi, self.t)
            return (self.t, *[x for x, _ in nu.atoms])
        return (self.t,)

    def element(self) -> A1Element:
        m = HalfLineMeasure(density=self, breakpoints=self.breakpoints,
                            scan=(1e-8, self.t + 40.0 * math.sqrt(self.t) + 60.0))
        tf = lambda z, f=_delta_transform(self.phi, self.t): f(z) / np.asarray(z, dtype=complex) ** 2
        return A1Element(m, tf, f"G({self.phi.name},{self.t})")

    def integral(self) -> float:
        if self.phi.kind is Kind.IDENTITY:
            return 0.0
        edges = [0.0, *sorted(set(self.breakpoints)), math.inf]
        return float(sum(gauss_kronrod(self, a, b, abs_tol=1e-12, rel_tol=1e-12)[0]
                         for a, b in zip(edges[:-1], edges[1:])))


def delta_kernel(phi: BernsteinFunction, t: float) -> DeltaKernel:
    _require_closed_form(phi)
    if t <= 0:
        raise ValueError("t must be positive")
    return DeltaKernel(phi, t)


def delta_kernel_density(phi: BernsteinFunction, t: float, s) -> np.ndarray:
    """``G_t(s)``: ``int_0^s (s-x) nu_t(dx)`` for ``s <= t``, ``int_s^inf (x-s) nu_t(dx)`` beyond."""
    s = np.asarray(s, dtype=float)
    if phi.kind is Kind.IDENTITY:
        return np.zeros_like(s)
    nu = subordination_measure(phi, t)
    left = s <= t
    out = np.zeros_like(s)
    for x, w in nu.atoms:
        out += w * np.where(left, np.maximum(s - x, 0.0), np.maximum(x - s, 0.0))
    for w, k in nu.gamma_mixture:
        lower = s * gammainc(k, s) - k * gammainc(k + 1.0, s)
        upper = k * gammaincc(k + 1.0, s) - s * gammaincc(k, s)
        out += w * np.where(left, lower, upper)
    return out


def _cumulants(phi: BernsteinFunction, t: float, n: int) -> list[float]:
    # kappa_1 = t phi'(0) and kappa_j = t int s^j mu(ds) for j >= 2
    out = [0.0, t]
    for j in range(2, n + 1):
        if phi.kind is Kind.YOSIDA:
            mom = math.factorial(j)
        elif phi.kind is Kind.DUNFORD_SEGAL:
            mom = 1.0
        else:
            mom = math.factorial(j - 1)
        out.append(t * mom)
    return out


@lru_cache(maxsize=256)
def raw_moments(phi: BernsteinFunction, t: float, n: int) -> tuple[float, ...]:
    """Raw moments ``m_0..m_n`` of ``nu_t`` from its cumulants."""
    kap = _cumulants(phi, t, n)
    m = [1.0]
    for j in range(1, n + 1):
        m.append(sum(math.comb(j - 1, k - 1) * kap[k] * m[j - k] for k in range(1, j + 1)))
    return tuple(m)


def _fractional_tail(phi: BernsteinFunction, t: float, alpha: float, S: float,
                     max_terms: int = 40) -> Tail:
    """Integral of the fractional density beyond ``S`` from its large-``s`` expansion."""
    m = raw_moments(phi, t, max_terms)
    total, last = 0.0, math.inf
    for j in range(2, max_terms + 1):
        c = binom(alpha - 1.0, j) * (-1) ** j * (m[j] - t ** j)
        if j == alpha:
            continue
        term = c * S ** (alpha - j) / (j - alpha)
        if abs(term) > last and j > 3:
            break
        total += term
        last = abs(term)
        if last < 1e-16:
            break
    total /= math.gamma(alpha)
    return Tail(S, total, abs(total), last / math.gamma(alpha))


def _fractional_regular(phi: BernsteinFunction, t: float, alpha: float, s) -> np.ndarray:
    # fractional integral of the Gamma-mixture part of nu_t
    s = np.asarray(s, dtype=float)
    nu = subordination_measure(phi, t)
    out = np.zeros_like(s)
    pos = s > 0
    logs = np.log(np.where(pos, s, 1.0))
    sp = np.where(pos, s, 0.0)
    for w, k in nu.gamma_mixture:
        b = alpha + k
        val = np.exp((b - 1.0) * logs - gammaln(b)) * kummer_1F1_scaled(alpha, b, sp)
        out += np.where(pos, w * val, 0.0)
    return out


def _fractional_atoms(phi: BernsteinFunction, t: float) -> tuple[tuple[float, float], ...]:
    return (*subordination_measure(phi, t).atoms, (t, -1.0))


def fractional_delta_density(phi: BernsteinFunction, t: float, alpha: float, s) -> np.ndarray:
    """Density of ``z**-alpha Delta_t``: the fractional integral of ``nu_t - delta_t``."""
    s = np.asarray(s, dtype=float)
    out = _fractional_regular(phi, t, alpha, s)
    ga = math.gamma(alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        for x, w in _fractional_atoms(phi, t):
            d = s - x
            out += np.where(d > 0, w * np.abs(d) ** (alpha - 1.0) / ga, 0.0)
    return out


def fractional_delta(phi: BernsteinFunction, t: float, alpha: float) -> A1Element:
    """``z**-alpha Delta_t`` as an element with explicit density, ``alpha`` in ``[0, 2]``."""
    _check_alpha(alpha)
    _require_closed_form(phi)
    if alpha == 0.0 or phi.kind is Kind.IDENTITY:
        return delta_measure(phi, t)
    if alpha == 2.0:
        return delta_kernel(phi, t).element()
    nu = subordination_measure(phi, t)
    kmax = max([x for x, _ in nu.atoms] + [k for _, k in nu.gamma_mixture] + [0.0])
    S = max(kmax + 10.0, 2.0 * t + 60.0)
    tf = lambda z, f=_delta_transform(phi, t): f(z) * np.asarray(z, dtype=complex) ** (-alpha)
    regular = None
    if nu.gamma_mixture:
        regular = lambda s: _fractional_regular(phi, t, alpha, s)
    m = HalfLineMeasure(
        density=regular,
        singular=_fractional_atoms(phi, t),
        order=alpha,
        scan=(1e-8, S),
        tail=_fractional_tail(phi, t, alpha, S),
    )
    return A1Element(m, tf, f"z^-{alpha} Delta({phi.name},{t})")


# -- interpolation bounds -------------------------------------------------------

def interpolation_bound(a: float, b: float, beta: float, alpha: float) -> float:
    """``2**beta c_beta**(alpha/beta) a**(1-alpha/beta) b**(alpha/beta)``."""
    if a <= 0 or b <= 0 or beta <= 0:
        raise ValueError("a, b and beta must be positive")
    if not 0.0 <= alpha <= beta:
        raise ValueError("alpha must lie in [0, beta]")
    r = alpha / beta
    return 2.0 ** beta * c_beta(beta) ** r * a ** (1.0 - r) * b ** r


@dataclass(frozen=True)
class DeltaNormBounds:
    relaxed: float
    tight: float
    a: float
    b: float


def delta_fractional_norm(phi: BernsteinFunction, t: float, alpha: float) -> float:
    """Upper bound ``8 (t |phi''(0+)|)**(alpha/2)`` on the norm of ``z**-alpha Delta_t``."""
    _check_alpha(alpha)
    d2 = abs(derivatives_at_zero(phi).d2)
    return 8.0 * (t * d2) ** (alpha / 2.0)


def delta_fractional_bounds(phi: BernsteinFunction, t: float, alpha: float) -> DeltaNormBounds:
    """Relaxed bound together with the interpolation form using ``a = ||Delta_t||``, ``b = t|phi''|/2``."""
    _check_alpha(alpha)
    relaxed = delta_fractional_norm(phi, t, alpha)
    b = t * abs(derivatives_at_zero(phi).d2) / 2.0
    if b == 0.0:
        return DeltaNormBounds(relaxed, 0.0, 0.0, 0.0)
    a = a1_norm(delta_measure(phi, t))
    return DeltaNormBounds(relaxed, interpolation_bound(a, b, 2.0, alpha), a, b)


def scaled_delta_bounds(phi: BernsteinFunction, t: float, n: int, alpha: float) -> tuple[float, float]:
    """Bounds ``8(|phi''| t/n)**(alpha/2)`` and ``8(|phi''| t**2/n)**(alpha/2)`` for the scaled schemes."""
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("n must be >= 1")
    d2 = abs(derivatives_at_zero(phi).d2)
    return 8.0 * (d2 * t / n) ** (alpha / 2.0), 8.0 * (d2 * t * t / n) ** (alpha / 2.0)


__all__ = [
    "C1", "C2", "make_u", "make_v", "delta_measure", "DeltaKernel", "delta_kernel",
    "delta_kernel_density", "raw_moments", "fractional_delta_density", "fractional_delta",
    "interpolation_bound", "DeltaNormBounds", "delta_fractional_norm",
    "delta_fractional_bounds", "scaled_delta_bounds", "a1_norm",
]
