"""Bernstein functions in Levy-Khintchine form and their subordination measures.

A Bernstein function is ``phi(z) = a + b z + int (1 - e^{-zs}) mu(ds)``.  The
three built-in approximation generators

* ``z/(z+1)``      (Yosida, ``mu = e^{-s} ds``),
* ``1 - e^{-z}``   (Dunford-Segal, ``mu = delta_1``),
* ``log(1+z)``     (Euler, ``mu = e^{-s}/s ds``)

have closed forms for ``phi``, its derivatives and the convolution semigroup
``nu_t`` with Laplace transform ``e^{-t phi}``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, ive
from scipy.stats import poisson

from .errors import ConfigError, QuadratureError, UnboundedFunction, UnsupportedKind
from .measures import HalfLineMeasure
from .quadrature import gauss_kronrod

POISSON_TAIL = 1e-14


class Kind(enum.Enum):
    YOSIDA = "yosida"
    DUNFORD_SEGAL = "dunford-segal"
    EULER = "euler"
    IDENTITY = "identity"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LevyTriple:
    """``(a, b, mu)`` with ``mu`` a nonnegative measure on ``(0, inf)``."""

    a: float = 0.0
    b: float = 0.0
    mu: HalfLineMeasure = field(default_factory=HalfLineMeasure)

    def __post_init__(self):
        if not (self.a >= 0 and self.b >= 0):
            raise ValueError("a and b must be nonnegative")
        for loc, w in self.mu.atoms:
            if loc <= 0:
                raise ValueError("Levy measure may not charge 0")
            if w < 0:
                raise ValueError("Levy measure atoms must be nonnegative")

    @classmethod
    def from_json(cls, doc) -> "LevyTriple":
        """Build from ``{"a", "b", "atoms": [[s, w]], "density": {"grid", "values"}}``.

        ``doc`` may be a mapping, a JSON string or a path.  The density is
        piecewise linear on its grid and zero outside it.
        """
        if isinstance(doc, (str, Path)) and Path(str(doc)).exists():
            doc = Path(doc).read_text()
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"Levy triple JSON, line {exc.lineno}: {exc.msg}") from exc
        try:
            a = float(doc.get("a", 0.0))
            b = float(doc.get("b", 0.0))
            atoms = [(float(s), float(w)) for s, w in doc.get("atoms", [])]
            dens = doc.get("density")
            density = None
            bps: tuple[float, ...] = ()
            end = math.inf
            if dens is not None:
                grid = np.asarray(dens["grid"], dtype=float)
                vals = np.asarray(dens["values"], dtype=float)
                if grid.shape != vals.shape or grid.size < 2:
                    raise ConfigError("density: grid and values must have equal length >= 2")
                if np.any(np.diff(grid) <= 0) or grid[0] < 0:
                    raise ConfigError("density: grid must be increasing and nonnegative")
                if np.any(vals < 0):
                    raise ConfigError("density: values must be nonnegative")
                density = lambda s, g=grid, v=vals: np.interp(s, g, v, left=0.0, right=0.0)
                bps = tuple(grid)
                end = float(grid[-1])
            return cls(a, b, HalfLineMeasure(atoms=tuple(atoms), density=density,
                                             breakpoints=bps, support_end=end))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid Levy triple: {exc}") from exc


class Derivatives(NamedTuple):
    phi0: float
    d1: float
    d2: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.d2)


def _exp_density(s):
    return np.exp(-np.asarray(s, dtype=float))


def _euler_levy_density(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(-s) / s


_BUILTIN_TRIPLES = {
    Kind.YOSIDA: LevyTriple(0.0, 0.0, HalfLineMeasure(density=_exp_density)),
    Kind.DUNFORD_SEGAL: LevyTriple(0.0, 0.0, HalfLineMeasure(atoms=((1.0, 1.0),))),
    Kind.EULER: LevyTriple(0.0, 0.0, HalfLineMeasure(density=_euler_levy_density)),
    Kind.IDENTITY: LevyTriple(0.0, 1.0),
}

_BUILTIN_DERIVATIVES = {
    Kind.YOSIDA: Derivatives(0.0, 1.0, -2.0),
    Kind.DUNFORD_SEGAL: Derivatives(0.0, 1.0, -1.0),
    Kind.EULER: Derivatives(0.0, 1.0, -1.0),
    Kind.IDENTITY: Derivatives(0.0, 1.0, 0.0),
}


@dataclass(frozen=True)
class BernsteinFunction:
    kind: Kind
    triple: LevyTriple | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind is Kind.CUSTOM:
            if self.triple is None:
                raise ValueError("custom Bernstein function needs a Levy triple")
        else:
            object.__setattr__(self, "triple", _BUILTIN_TRIPLES[self.kind])
        if not self.name:
            object.__setattr__(self, "name", self.kind.value)

    @classmethod
    def custom(cls, triple: LevyTriple, name: str = "custom") -> "BernsteinFunction":
        return cls(Kind.CUSTOM, triple, name)

    @property
    def builtin(self) -> bool:
        return self.kind is not Kind.CUSTOM

    def __call__(self, z):
        return eval_phi(self, z)

    def derivative(self, z):
        """``phi'(z)`` on the closed right half-plane."""
        z = np.asarray(z, dtype=complex)
        if self.kind is Kind.YOSIDA:
            return 1.0 / (1.0 + z) ** 2
        if self.kind is Kind.DUNFORD_SEGAL:
            return np.exp(-z)
        if self.kind is Kind.EULER:
            return 1.0 / (1.0 + z)
        if self.kind is Kind.IDENTITY:
            return np.ones_like(z)
        tr = self.triple
        return _levy_map(tr.mu, z, lambda zz, s: s * np.exp(-zz * s)) + tr.b

    def derivatives_at_zero(self) -> Derivatives:
        return derivatives_at_zero(self)


YOSIDA = BernsteinFunction(Kind.YOSIDA)
DUNFORD_SEGAL = BernsteinFunction(Kind.DUNFORD_SEGAL)
EULER = BernsteinFunction(Kind.EULER)
IDENTITY = BernsteinFunction(Kind.IDENTITY)
BUILTINS = {f.name: f for f in (YOSIDA, DUNFORD_SEGAL, EULER, IDENTITY)}


def by_name(name: str) -> BernsteinFunction:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown Bernstein function {name!r}; choose from {sorted(BUILTINS)}")


def _levy_map(mu: HalfLineMeasure, z: np.ndarray, kernel) -> np.ndarray:
    """``int kernel(z, s) mu(ds)`` for each entry of ``z``."""
    z = np.atleast_1d(z)
    out = np.zeros(z.shape, dtype=complex)
    for i, zz in np.ndenumerate(z):
        total = 0j
        for loc, w in mu.atoms:
            total += w * kernel(zz, loc)
        if mu.density is not None:
            edges = [0.0, *mu.breakpoints, mu.support_end]
            for lo, hi in zip(edges[:-1], edges[1:]):
                v, _ = gauss_kronrod(lambda s: kernel(zz, s) * mu.density(s), lo, hi,
                                     abs_tol=1e-13, rel_tol=1e-12)
                total += v
        out[i] = total
    return out


def expm1c(z):
    """``e^z - 1`` for complex ``z`` without cancellation near 0."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    return np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2 + 1j * np.exp(x) * np.sin(y)


def log1pc(z):
    """``log(1 + z)`` for complex ``z`` without cancellation near 0."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    return 0.5 * np.log1p(x * (2.0 + x) + y * y) + 1j * np.arctan2(y, 1.0 + x)


def eval_phi(phi: BernsteinFunction, z):
    """Evaluate ``phi`` on ``Re z >= 0`` (closed form for built-ins)."""
    z_arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z_arr)):
        raise ValueError("z must be finite")
    if np.any(z_arr.real < -1e-14):
        raise ValueError("phi is evaluated on the closed right half-plane only")
    if phi.kind is Kind.YOSIDA:
        out = z_arr / (z_arr + 1.0)
    elif phi.kind is Kind.DUNFORD_SEGAL:
        out = -expm1c(-z_arr)
    elif phi.kind is Kind.EULER:
        out = log1pc(z_arr)
    elif phi.kind is Kind.IDENTITY:
        out = z_arr.copy()
    else:
        tr = phi.triple
        # (1 - e^{-zs})/s is bounded near 0, so the integrand is tame wherever mu is Levy
        out = tr.a + tr.b * z_arr + _levy_map(tr.mu, z_arr, lambda zz, s: -expm1c(-zz * s)).reshape(z_arr.shape)
    return out if np.ndim(z) else complex(out)


def derivatives_at_zero(phi: BernsteinFunction) -> Derivatives:
    """``(phi(0), phi'(0+), phi''(0+))``; ``phi''(0+)`` is ``-inf`` when ``mu`` has no second moment."""
    if phi.builtin:
        return _BUILTIN_DERIVATIVES[phi.kind]
    tr = phi.triple
    m1 = tr.mu.integrate(lambda s: s)
    try:
        m2 = tr.mu.integrate(lambda s: s * s)
    except QuadratureError:
        m2 = math.inf
    return Derivatives(float(tr.a), float(tr.b + np.real(m1)), -float(np.real(m2)))


def is_in_phi(phi: BernsteinFunction, tol: float = 1e-10) -> bool:
    d = derivatives_at_zero(phi)
    return abs(d.phi0) <= tol and abs(d.d1 - 1.0) <= tol and d.finite


def bounded_bernstein_norm(phi: BernsteinFunction) -> float:
    """``a + 2 mu((0, inf)) = 2 phi(inf) - phi(0)`` for bounded ``phi``."""
    if phi.kind in (Kind.EULER, Kind.IDENTITY):
        raise UnboundedFunction(f"{phi.name} is unbounded on the positive axis")
    tr = phi.triple
    if tr.b > 0:
        raise UnboundedFunction("linear coefficient b > 0")
    try:
        mass = tr.mu.mass()
    except QuadratureError as exc:
        raise UnboundedFunction("Levy measure has infinite mass") from exc
    if not math.isfinite(mass):
        raise UnboundedFunction("Levy measure has infinite mass")
    return tr.a + 2.0 * mass


# -- subordination measures ---------------------------------------------------

@dataclass(frozen=True)
class SubordinationMeasure:
    """``nu_t`` with ``L nu_t = exp(-t phi)``.

    Besides the generic measure, ``atoms`` and ``gamma_mixture`` describe
    ``nu_t`` as ``sum w delta_x + sum w_k Gamma(kappa_k, 1)``, which lets
    callers integrate kernels against it in closed form.
    """

    t: float
    measure: HalfLineMeasure
    atoms: tuple[tuple[float, float], ...]
    gamma_mixture: tuple[tuple[float, float], ...]


def gamma_density(kappa: float, s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp((kappa - 1.0) * np.log(s) - s - gammaln(kappa))
    return np.where(s > 0, out, 0.0 if kappa >= 1 else np.inf) if kappa != 1 else np.where(s >= 0, np.exp(-s), 0.0)


def _poisson_support(t: float) -> np.ndarray:
    kmax = int(poisson.isf(POISSON_TAIL, t)) + 1
    return np.arange(kmax + 1)


def yosida_density(t: float, s):
    """``e^{-t-s} sqrt(t/s) I_1(2 sqrt(ts))`` in an overflow-free form."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rs = np.sqrt(np.maximum(s, 0.0))
        x = 2.0 * math.sqrt(t) * rs
        out = np.sqrt(t / s) * ive(1, x) * np.exp(-(math.sqrt(t) - rs) ** 2)
    # the s -> 0 limit is t e^{-t}
    return np.where(s > 0, out, t * math.exp(-t))


def subordination_measure(phi: BernsteinFunction, t: float) -> SubordinationMeasure:
    if t <= 0:
        raise ValueError("t must be positive")
    scan_hi = t + 40.0 * math.sqrt(t) + 60.0
    if phi.kind is Kind.EULER:
        dens = lambda s, k=t: gamma_density(k, s)
        m = HalfLineMeasure(density=dens, scan=(1e-10, scan_hi))
        return SubordinationMeasure(t, m, (), ((1.0, t),))
    if phi.kind is Kind.DUNFORD_SEGAL:
        ks = _poisson_support(t)
        ws = poisson.pmf(ks, t)
        atoms = tuple((float(k), float(w)) for k, w in zip(ks, ws) if w > 0)
        return SubordinationMeasure(t, HalfLineMeasure(atoms=atoms), atoms, ())
    if phi.kind is Kind.YOSIDA:
        ks = _poisson_support(t)[1:]
        ws = poisson.pmf(ks, t)
        mix = tuple((float(w), float(k)) for k, w in zip(ks, ws) if w > 0)
        atoms = ((0.0, math.exp(-t)),)
        m = HalfLineMeasure(atoms=atoms, density=lambda s, tt=t: yosida_density(tt, s),
                            scan=(1e-10, scan_hi))
        return SubordinationMeasure(t, m, atoms, mix)
    raise UnsupportedKind(f"no closed-form subordination measure for {phi.name}")
