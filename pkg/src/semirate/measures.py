"""Signed measures on the half-line and their Laplace transforms.

A :class:`HalfLineMeasure` is a finite list of atoms plus an optional density
given as a vectorized callable.  Elements of the convolution algebra of such
measures are wrapped by :class:`A1Element`, whose norm is the total variation
of the underlying measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import QuadratureError
from .quadrature import gauss_kronrod

Density = Callable[[np.ndarray], np.ndarray]

SCAN_POINTS = 4096
ABS_TOL = 1e-12


def _merge_atoms(atoms: Sequence[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    merged: dict[float, float] = {}
    for loc, w in atoms:
        loc = float(loc)
        if loc < 0:
            raise ValueError(f"atom at negative location {loc}")
        merged[loc] = merged.get(loc, 0.0) + float(w)
    return tuple(sorted((loc, w) for loc, w in merged.items() if w != 0.0))


@dataclass(frozen=True)
class Tail:
    """Analytic description of a density beyond ``start``.

    ``integral`` and ``abs_integral`` give the signed and absolute mass of
    the density on ``[start, inf)``; ``error`` bounds their inaccuracy.
    """

    start: float
    integral: float
    abs_integral: float
    error: float = 0.0


@dataclass(frozen=True)
class HalfLineMeasure:
    """Atoms ``(location, weight)`` plus a density on ``(0, inf)``.

    ``breakpoints`` lists points where the density is singular or not smooth;
    ``scan`` is the range searched for sign changes.  ``tail`` optionally
    replaces numerical integration beyond ``tail.start``.

    ``singular`` adds power terms ``w (s-x)_+^{order-1} / Gamma(order)`` to the
    density.  They arise as fractional integrals of atoms and are integrated in
    closed form, since floating point cannot resolve ``s - x`` below
    ``eps * x`` when the singularity sits away from the origin.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: Density | None = None
    breakpoints: tuple[float, ...] = ()
    support_end: float = math.inf
    scan: tuple[float, float] = (1e-8, 60.0)
    tail: Tail | None = None
    singular: tuple[tuple[float, float], ...] = ()
    order: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "atoms", _merge_atoms(self.atoms))
        object.__setattr__(self, "singular", _merge_atoms(self.singular))
        bps = {float(b) for b in self.breakpoints if 0.0 < b < self.support_end}
        bps |= {x for x, _ in self.singular if 0.0 < x < self.support_end}
        bps = sorted(bps)
        object.__setattr__(self, "breakpoints", tuple(bps))

    # -- construction -------------------------------------------------
    @classmethod
    def atom(cls, location: float, weight: float = 1.0) -> "HalfLineMeasure":
        return cls(atoms=((location, weight),))

    def scaled(self, c: float) -> "HalfLineMeasure":
        dens = None if self.density is None else (lambda s, d=self.density: c * d(s))
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = Tail(t.start, c * t.integral, abs(c) * t.abs_integral, abs(c) * t.error)
        return replace(self, atoms=tuple((x, c * w) for x, w in self.atoms), density=dens, tail=tail,
                       singular=tuple((x, c * w) for x, w in self.singular))

    def __add__(self, other: "HalfLineMeasure") -> "HalfLineMeasure":
        if self.tail is not None or other.tail is not None:
            raise ValueError("cannot add measures carrying analytic tails")
        if self.singular or other.singular:
            raise ValueError("cannot add measures carrying singular power terms")
        if self.density is None:
            dens = other.density
        elif other.density is None:
            dens = self.density
        else:
            dens = lambda s, f=self.density, g=other.density: f(s) + g(s)
        return HalfLineMeasure(
            atoms=self.atoms + other.atoms,
            density=dens,
            breakpoints=self.breakpoints + other.breakpoints,
            support_end=max(self.support_end, other.support_end),
            scan=(min(self.scan[0], other.scan[0]), max(self.scan[1], other.scan[1])),
        )

    def __sub__(self, other: "HalfLineMeasure") -> "HalfLineMeasure":
        return self + other.scaled(-1.0)

    # -- integration --------------------------------------------------
    def _edges(self) -> list[float]:
        end = self.support_end
        if self.tail is not None:
            end = min(end, self.tail.start)
        return [0.0, *[b for b in self.breakpoints if b < end], end]

    @property
    def has_density(self) -> bool:
        return self.density is not None or bool(self.singular)

    def full_density(self, s) -> np.ndarray:
        """Density including the singular power terms."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s) if self.density is None else np.asarray(self.density(s), dtype=float)
        if self.singular:
            g = math.gamma(self.order)
            with np.errstate(divide="ignore", invalid="ignore"):
                for x, w in self.singular:
                    d = s - x
                    out = out + np.where(d > 0, w * np.abs(d) ** (self.order - 1.0) / g, 0.0)
        return out

    def _singular_integral(self, a: float, b: float) -> float:
        g = math.gamma(self.order + 1.0)
        return sum(w * (max(b - x, 0.0) ** self.order - max(a - x, 0.0) ** self.order) / g
                   for x, w in self.singular)

    def integrate(self, g: Callable[[np.ndarray], np.ndarray], abs_tol: float = 1e-12,
                  rel_tol: float = 1e-11) -> complex | float:
        """Integrate ``g`` against the measure.  ``g`` must be vectorized."""
        if self.singular:
            raise ValueError("integrate() does not support singular power terms")
        total = 0.0
        if self.atoms:
            locs = np.array([x for x, _ in self.atoms])
            ws = np.array([w for _, w in self.atoms])
            total = total + np.sum(ws * np.asarray(g(locs)))
        if self.density is not None:
            if self.tail is not None:
                raise ValueError("integrate() needs an explicit density beyond the tail start")
            edges = self._edges()
            for a, b in zip(edges[:-1], edges[1:]):
                v, _ = gauss_kronrod(lambda s: g(s) * self.density(s), a, b,
                                     abs_tol=abs_tol, rel_tol=rel_tol)
                total = total + v
        return total.item() if isinstance(total, np.generic) else total

    def mass(self) -> float:
        """Signed total mass."""
        m = sum(w for _, w in self.atoms)
        if self.has_density:
            edges = self._edges()
            for a, b in zip(edges[:-1], edges[1:]):
                if self.density is not None:
                    m += gauss_kronrod(self.density, a, b, abs_tol=1e-13, rel_tol=1e-12)[0]
                m += self._singular_integral(a, b)
            if self.tail is not None:
                m += self.tail.integral
        return float(m)

    def moment(self, k: int) -> float:
        return float(np.real(self.integrate(lambda s: s ** k)))

    def laplace(self, z: complex) -> complex:
        return complex(self.integrate(lambda s: np.exp(-z * s)))

    # -- total variation ----------------------------------------------
    def sign_change_points(self) -> list[float]:
        """Roots of the density located by a log-grid scan and bracketing."""
        if not self.has_density:
            return []
        lo, hi = self.scan
        if self.tail is not None:
            hi = min(hi, self.tail.start)
        hi = min(hi, self.support_end)
        grid = np.unique(np.concatenate([np.geomspace(lo, hi, SCAN_POINTS), self.breakpoints]))
        grid = grid[(grid > 0) & (grid <= hi)]
        with np.errstate(all="ignore"):
            vals = self.full_density(grid)
        f = lambda u: float(self.full_density(np.array([u]))[0])
        # flips among values at rounding level are cancellation noise, and
        # splitting there changes the variation by O(eps * length) only
        finite = np.abs(vals[np.isfinite(vals)])
        floor = 64 * np.finfo(float).eps * (finite.max() if finite.size else 0.0)
        flips = (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0) & (np.maximum(np.abs(vals[:-1]), np.abs(vals[1:])) > floor)
        roots = []
        for i in np.nonzero(flips)[0]:
            try:
                # the density vanishes at the root, so a root error d moves the
                # integral by O(d^2); 1e-12 relative is ample
                roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-12))
            except (ValueError, RuntimeError):
                # a sign flip across a singular breakpoint has no root to find
                continue
        return roots

    def total_variation(self, abs_tol: float = ABS_TOL) -> tuple[float, float]:
        """Return ``(|mu|([0, inf)), error_estimate)``."""
        tv = sum(abs(w) for _, w in self.atoms)
        err = 0.0
        if not self.has_density:
            return float(tv), 0.0
        cuts = sorted(set(self._edges()) | set(self.sign_change_points()))
        pieces = list(zip(cuts[:-1], cuts[1:]))
        for a, b in pieces:
            v, e = 0.0, 0.0
            if self.density is not None:
                v, e = gauss_kronrod(self.density, a, b, abs_tol=abs_tol / max(len(pieces), 1),
                                     rel_tol=1e-12)
            v += self._singular_integral(a, b)
            tv += abs(v)
            err += e
        if self.tail is not None:
            tv += self.tail.abs_integral
            err += self.tail.error
        return float(tv), float(err)


@dataclass(frozen=True)
class A1Element:
    """Laplace transform of a bounded measure on ``[0, inf)``.

    ``transform`` is an optional closed-form evaluator used instead of
    numerical Laplace integration.
    """

    measure: HalfLineMeasure
    transform: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, z):
        if self.transform is not None:
            return self.transform(np.asarray(z, dtype=complex))
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.array([self.measure.laplace(zz) for zz in z])

    def norm_estimate(self) -> tuple[float, float]:
        if "norm" not in self._cache:
            self._cache["norm"] = self.measure.total_variation()
        return self._cache["norm"]

    def norm(self) -> float:
        return self.norm_estimate()[0]

    def __mul__(self, other: "A1Element") -> "A1Element":
        tf = None
        if self.transform is not None and other.transform is not None:
            tf = lambda z, f=self.transform, g=other.transform: f(z) * g(z)
        return A1Element(convolve(self.measure, other.measure), tf)


def a1_norm(f: A1Element) -> float:
    """Total-variation norm of the measure behind ``f``."""
    value, err = f.norm_estimate()
    if err > 1e-8 * max(value, 1.0):
        raise QuadratureError(f"norm error estimate {err:.2e} too large", achieved=err)
    return value


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _conv_density(f: Density, g: Density, s: np.ndarray, panels: int = 8) -> np.ndarray:
    """``int_0^s f(u) g(s-u) du`` by composite 16-point Gauss-Legendre."""
    s = np.asarray(s, dtype=float)
    edges = np.linspace(0.0, 1.0, panels + 1)
    u = (0.5 * (edges[:-1] + edges[1:])[:, None] + 0.5 / panels * _GL_X[None, :]).ravel()
    w = np.tile(_GL_W, panels) * (0.5 / panels)
    nodes = s[:, None] * u[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape) * g((s[:, None] - nodes).ravel()).reshape(nodes.shape)
    return s * (vals @ w)


def convolve(m1: HalfLineMeasure, m2: HalfLineMeasure) -> HalfLineMeasure:
    """Convolution of two measures.

    Atoms convolve exactly, atom-density pairs by translation and the
    density-density part by fixed composite quadrature, which is accurate for
    smooth densities.
    """
    atoms = [(x + y, w * v) for x, w in m1.atoms for y, v in m2.atoms]
    parts: list[Density] = []
    bps: list[float] = []
    for (dens, other) in ((m2.density, m1), (m1.density, m2)):
        if dens is None:
            continue
        for x, w in other.atoms:
            parts.append(lambda s, d=dens, x=x, w=w: np.where(s > x, w * d(np.maximum(s - x, 0.0)), 0.0))
            bps.append(x)
    if m1.density is not None and m2.density is not None:
        parts.append(lambda s, f=m1.density, g=m2.density: _conv_density(f, g, s))
    def summed(s, parts=tuple(parts)):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for p in parts:
            out = out + p(s)
        return out

    density = summed if parts else None
    bps += [x + b for x, _ in m1.atoms for b in m2.breakpoints]
    bps += [y + b for y, _ in m2.atoms for b in m1.breakpoints]
    return HalfLineMeasure(
        atoms=tuple(atoms),
        density=density,
        breakpoints=tuple(bps),
        scan=(min(m1.scan[0], m2.scan[0]), m1.scan[1] + m2.scan[1]),
    )
