"""Spectral functional calculus for diagonalizable matrix generators.

``Generator`` caches an eigendecomposition ``A = V diag(lam) V^{-1}``; normal
matrices use a complex Schur form so that ``V`` is unitary and operator norms
of ``f(A)`` reduce to ``max |f(lam)|``.  Everything else is ``V diag(f(lam))
V^{-1}`` with spectral norms from the SVD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad_vec
from scipy.optimize import minimize_scalar

from .bernstein import BernsteinFunction, expm1c, subordination_measure
from .errors import DefectiveMatrix, NumericalError, UnboundedSemigroup, ZeroEigenvalue

KAPPA_CAP = 1e6
ZERO_SNAP = 1e-13
RHP_SLACK = 1e-12

ScalarFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Generator:
    """Dense complex matrix ``A`` with a cached eigendecomposition."""

    matrix: np.ndarray
    kappa_cap: float = KAPPA_CAP
    eigenvalues: np.ndarray = field(init=False, repr=False)
    V: np.ndarray = field(init=False, repr=False)
    Vinv: np.ndarray = field(init=False, repr=False)
    kappa: float = field(init=False)
    normal: bool = field(init=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("generator must be a square matrix")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        scale = max(np.linalg.norm(A, 2), 1.0)
        comm = A @ A.conj().T - A.conj().T @ A
        normal = np.linalg.norm(comm, 2) <= 1e-12 * scale ** 2
        if normal:
            T, Z = sla.schur(A, output="complex")
            lam, V, Vinv, kappa = np.diag(T).copy(), Z, Z.conj().T, 1.0
        else:
            lam, V = sla.eig(A)
            kappa = float(np.linalg.cond(V))
            if not math.isfinite(kappa) or kappa > self.kappa_cap:
                raise DefectiveMatrix(f"eigenvector condition number {kappa:.3e} exceeds cap {self.kappa_cap:.1e}")
            Vinv = np.linalg.solve(V, np.eye(A.shape[0]))
        lam = np.where(np.abs(lam) < ZERO_SNAP, 0.0, lam)
        for name, val in (("eigenvalues", lam), ("V", V), ("Vinv", Vinv)):
            val = np.asarray(val)
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "normal", bool(normal))

    @classmethod
    def diagonal(cls, values) -> "Generator":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum_in_closed_rhp(self) -> bool:
        return bool(np.all(self.eigenvalues.real >= -RHP_SLACK))

    @property
    def injective(self) -> bool:
        return bool(np.all(self.eigenvalues != 0))

    def apply(self, f: ScalarFn) -> np.ndarray:
        """``f(A)`` by spectral calculus."""
        vals = np.asarray(f(self.eigenvalues), dtype=complex)
        return (self.V * vals[None, :]) @ self.Vinv

    def opnorm(self, f: ScalarFn) -> float:
        """Spectral norm of ``f(A)``."""
        if self.normal:
            return float(np.max(np.abs(f(self.eigenvalues)))) if self.n else 0.0
        return float(np.linalg.norm(self.apply(f), 2))

    def vecnorm(self, f: ScalarFn, x: np.ndarray) -> float:
        """``||f(A) x||``."""
        return float(np.linalg.norm(self.apply(f) @ x))


def _require_rhp(A: Generator):
    if not A.spectrum_in_closed_rhp:
        raise UnboundedSemigroup("spectrum leaves the closed right half-plane")


def semigroup(A: Generator, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return np.eye(A.n, dtype=complex)
    return A.apply(lambda lam: np.exp(-t * lam))


def power_fn(alpha: float) -> ScalarFn:
    """Principal branch ``lam**alpha`` with ``0**alpha = 0`` for ``alpha > 0``."""
    def f(lam):
        lam = np.asarray(lam, dtype=complex)
        if alpha == 0:
            return np.ones_like(lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = lam ** alpha
        return np.where(lam == 0, 0.0, out) if alpha > 0 else out
    return f


def frac_power(A: Generator, alpha: float) -> np.ndarray:
    """``A**alpha`` (principal branch); negative ``alpha`` needs an injective ``A``."""
    if alpha < 0 and not A.injective:
        raise ZeroEigenvalue("negative power of a generator with a zero eigenvalue")
    return A.apply(power_fn(alpha))


def phi_of_A(phi: BernsteinFunction, A: Generator) -> np.ndarray:
    _require_rhp(A)
    return A.apply(lambda lam: phi(_rhp(lam)))


def _rhp(lam):
    # clip round-off excursions below the imaginary axis
    lam = np.asarray(lam, dtype=complex)
    return np.where(lam.real < 0, 1j * lam.imag, lam)


def subordinated_semigroup(phi: BernsteinFunction, A: Generator, t: float) -> np.ndarray:
    _require_rhp(A)
    if t == 0:
        return np.eye(A.n, dtype=complex)
    return A.apply(lambda lam: np.exp(-t * phi(_rhp(lam))))


def _exp_gap(a, b):
    """``exp(-a) - exp(-b)`` without cancellation when both terms are near 1.

    Uses ``exp(-b) expm1(b - a)`` where ``Re b <= 1`` and the direct
    difference elsewhere, where it cannot overflow.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    near = b.real <= 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        fine = np.exp(-b) * expm1c(b - a)
    return np.where(near, fine, np.exp(-a) - np.exp(-b))


def delta_fn(phi: BernsteinFunction, t: float, n: int = 1) -> ScalarFn:
    """``lam -> exp(-n t phi(lam/n)) - exp(-t lam)``."""
    return lambda lam: _exp_gap(n * t * phi(_rhp(lam) / n), t * np.asarray(lam, dtype=complex))


def e_fn(phi: BernsteinFunction, t: float, n: int = 1) -> ScalarFn:
    """``lam -> exp(-n phi(t lam/n)) - exp(-t lam)``."""
    return lambda lam: _exp_gap(n * phi(t * _rhp(lam) / n), t * np.asarray(lam, dtype=complex))


def delta_op(phi: BernsteinFunction, A: Generator, t: float, n: int = 1) -> np.ndarray:
    if n < 1 or t <= 0:
        raise ValueError("need n >= 1 and t > 0")
    _require_rhp(A)
    return A.apply(delta_fn(phi, t, n))


def e_op(phi: BernsteinFunction, A: Generator, t: float, n: int = 1) -> np.ndarray:
    if n < 1 or t <= 0:
        raise ValueError("need n >= 1 and t > 0")
    _require_rhp(A)
    return A.apply(e_fn(phi, t, n))


def resolvent_power(A: Generator, t: float, n: int) -> np.ndarray:
    """``(I + tA/n)^{-n}`` by ``n`` successive linear solves."""
    eye = np.eye(A.n, dtype=complex)
    lu = sla.lu_factor(eye + (t / n) * A.matrix)
    X = eye
    for _ in range(n):
        X = sla.lu_solve(lu, X)
    return X


# -- quadrature oracles (consistency checks, not the production path) ---------

def phi_of_A_quadrature(phi: BernsteinFunction, A: Generator) -> np.ndarray:
    """``a I + b A + int (I - e^{-sA}) mu(ds)`` with ``scipy`` matrix exponentials."""
    tr = phi.triple
    M = A.matrix
    eye = np.eye(A.n, dtype=complex)
    out = tr.a * eye + tr.b * M
    for loc, w in tr.mu.atoms:
        out = out + w * (eye - sla.expm(-loc * M))
    if tr.mu.density is not None:
        edges = [0.0, *tr.mu.breakpoints, tr.mu.support_end]
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = quad_vec(lambda s: (eye - sla.expm(-s * M)) * float(tr.mu.density(np.array([s]))[0]),
                              lo, hi, epsabs=1e-12, epsrel=1e-11)
            out = out + val
    return out


def subordinated_semigroup_quadrature(phi: BernsteinFunction, A: Generator, t: float) -> np.ndarray:
    """``int e^{-sA} nu_t(ds)`` against the closed-form subordination measure."""
    nu = subordination_measure(phi, t).measure
    M = A.matrix
    out = np.zeros((A.n, A.n), dtype=complex)
    for loc, w in nu.atoms:
        out = out + w * sla.expm(-loc * M)
    if nu.density is not None:
        val, _ = quad_vec(lambda s: sla.expm(-s * M) * float(nu.density(np.array([s]))[0]),
                          0.0, math.inf, epsabs=1e-12, epsrel=1e-11)
        out = out + val
    return out


# -- semigroup bounds ------------------------------------------------------------

@dataclass(frozen=True)
class SemigroupBounds:
    M0: float
    M1: float
    analytic: bool
    certification: dict

    @property
    def M(self) -> float:
        return max(2.0 * self.M0, self.M1)


def _grid_sup(fn: Callable[[float], float], ts: np.ndarray) -> tuple[float, float]:
    vals = np.array([fn(t) for t in ts])
    best = float(vals.max())
    arg = float(ts[vals.argmax()])
    # golden-section polish around each interior local maximum
    for i in range(1, len(ts) - 1):
        if vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]:
            res = minimize_scalar(lambda lt: -fn(math.exp(lt)), method="bounded",
                                  bounds=(math.log(ts[i - 1]), math.log(ts[i + 1])),
                                  options={"xatol": 1e-10})
            if -res.fun > best:
                best, arg = float(-res.fun), float(math.exp(res.x))
    return best, arg


def certify_bounds(A: Generator, t_max: float = 1e3, grid: int = 400) -> SemigroupBounds:
    """``M0 = sup ||e^{-tA}||`` and ``M1 = sup ||t A e^{-tA}||``.

    Normal generators use the exact values ``M0 = 1`` and
    ``M1 = max |lam| / (e Re lam)``.  Otherwise the sup is taken on a
    log-spaced grid with golden-section refinement, plus the tail bound
    ``kappa(V) e^{-t a}`` (``a`` the spectral abscissa) beyond ``t_max``.
    """
    lam = A.eigenvalues
    if np.any(lam.real < -RHP_SLACK):
        raise UnboundedSemigroup(f"eigenvalue with real part {lam.real.min():.3e} < 0")
    re = np.maximum(lam.real, 0.0)
    nz = lam != 0
    if A.normal:
        M0 = 1.0
        if np.any(nz & (re == 0)):
            M1 = math.inf
        else:
            M1 = float(np.max(np.abs(lam[nz]) / (math.e * re[nz]), initial=0.0))
        cert = {"method": "normal-closed-form"}
        return SemigroupBounds(M0, M1, math.isfinite(M1), cert)

    rho = float(np.max(np.abs(lam), initial=1.0))
    ts = np.geomspace(1e-4 / rho, t_max, grid)
    m0, _ = _grid_sup(lambda t: float(np.linalg.norm(semigroup(A, t), 2)), ts)
    m1, _ = _grid_sup(lambda t: t * A.opnorm(lambda z: z * np.exp(-t * z)), ts)
    m0 = max(m0, 1.0)
    a = float(re[nz].min()) if nz.any() else 0.0
    if np.any(nz & (re == 0)):
        # semisimple purely imaginary eigenvalues: bounded but not analytic
        return SemigroupBounds(max(m0, A.kappa), math.inf, False,
                               {"method": "grid", "t_grid": [float(ts[0]), t_max, grid], "tail": "kappa"})
    tail0 = A.kappa * math.exp(-a * t_max) if a > 0 else A.kappa
    t1 = max(t_max, 1.0 / a) if a > 0 else math.inf
    tail1 = A.kappa * rho * t1 * math.exp(-a * t1) if a > 0 else 0.0
    if a > 0 and tail0 > m0:
        raise NumericalError("tail bound dominates; increase t_max")
    cert = {"method": "grid", "t_grid": [float(ts[0]), t_max, grid],
            "tail": "spectral-abscissa", "tail_bounds": [tail0, tail1]}
    M0 = max(m0, tail0)
    M1 = max(m1, tail1)
    return SemigroupBounds(M0, M1, math.isfinite(M1), cert)


# -- the doubling construction ---------------------------------------------------

def mixed_norm_bounds(block: np.ndarray) -> tuple[float, float]:
    """Bracket the norm of an upper block-triangular ``[[P, Q], [0, R]]``
    on ``X + X`` with ``||(x1, x2)|| = max(||x1||, ||x2||)``."""
    n = block.shape[0] // 2
    P, Q, R = block[:n, :n], block[:n, n:], block[n:, n:]
    nP, nQ, nR = (np.linalg.norm(M, 2) for M in (P, Q, R))
    nPQ = np.linalg.norm(block[:n, :], 2)
    lower = max(nP, nQ, nR, nPQ)
    upper = max(min(nP + nQ, math.sqrt(2.0) * nPQ), nR)
    return float(lower), float(upper)


@dataclass(frozen=True, eq=False)
class DoubledGenerator:
    """The operator ``[[A, A], [0, A]]`` on ``X + X``.

    It is never diagonalizable, so functions are evaluated through
    ``f([[A, A], [0, A]]) = [[f(A), A f'(A)], [0, f(A)]]``.
    """

    base: Generator
    block: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = self.base.matrix
        Z = np.zeros_like(A)
        object.__setattr__(self, "block", np.block([[A, A], [Z, A]]))
        ref = sla.expm(-self.block)
        got = self.semigroup(1.0)
        scale = max(np.linalg.norm(semigroup(self.base, 1.0), 2), 1.0)
        if np.linalg.norm(ref - got, 2) > 1e-9 * scale:
            raise NumericalError("doubled semigroup disagrees with the block exponential")

    def apply(self, f: ScalarFn, fprime: ScalarFn) -> np.ndarray:
        A = self.base
        F = A.apply(f)
        G = A.apply(lambda lam: lam * fprime(lam))
        Z = np.zeros_like(F)
        return np.block([[F, G], [Z, F]])

    def opnorm(self, f: ScalarFn, fprime: ScalarFn) -> tuple[float, float]:
        """Norm bracket in the max-norm; exact (lower == upper) for normal ``A``."""
        A = self.base
        if A.normal:
            lam = A.eigenvalues
            p = np.abs(f(lam))
            q = np.abs(lam * fprime(lam))
            v = float(max(np.max(p + q), np.max(p)))
            return v, v
        return mixed_norm_bounds(self.apply(f, fprime))

    def semigroup(self, t: float) -> np.ndarray:
        return self.apply(lambda z: np.exp(-t * z), lambda z: -t * np.exp(-t * z))

    def subordinated_semigroup(self, phi: BernsteinFunction, t: float) -> np.ndarray:
        return self.apply(*subordinated_pair(phi, t))


def subordinated_pair(phi: BernsteinFunction, t: float) -> tuple[ScalarFn, ScalarFn]:
    """``exp(-t phi)`` and its derivative ``-t phi' exp(-t phi)``."""
    f = lambda z: np.exp(-t * phi(_rhp(z)))
    fp = lambda z: -t * phi.derivative(_rhp(z)) * np.exp(-t * phi(_rhp(z)))
    return f, fp


def double(A: Generator) -> DoubledGenerator:
    return DoubledGenerator(A)


@dataclass(frozen=True)
class TransferCheck:
    sup_semigroup: float
    bound_semigroup: float
    sup_analytic: float
    bound_analytic: float

    @property
    def ok(self) -> bool:
        return (self.sup_semigroup <= self.bound_semigroup * (1 + 1e-12)
                and self.sup_analytic <= self.bound_analytic * (1 + 1e-12))


def doubled_bound_transfer(A: Generator, bounds: SemigroupBounds | None = None,
                           ts: np.ndarray | None = None) -> TransferCheck:
    """Measure ``sup ||e^{-tD}||`` and ``sup ||t D e^{-tD}||`` for the doubled ``D``
    against ``M0 + M1`` and ``2 M1 + 4 M1^2``."""
    bounds = bounds or certify_bounds(A)
    D = double(A)
    rho = float(np.max(np.abs(A.eigenvalues), initial=1.0))
    ts = np.geomspace(1e-3 / rho, 1e3 / max(float(np.min(np.abs(A.eigenvalues[A.eigenvalues != 0]), initial=1.0)), 1e-6), 600) if ts is None else ts
    s0 = max(D.opnorm(lambda z: np.exp(-t * z), lambda z: -t * np.exp(-t * z))[1] for t in ts)
    s1 = max(D.opnorm(lambda z: t * z * np.exp(-t * z),
                      lambda z: t * np.exp(-t * z) * (1.0 - t * z))[1] for t in ts)
    return TransferCheck(s0, bounds.M0 + bounds.M1, s1, 2 * bounds.M1 + 4 * bounds.M1 ** 2)
