"""Verification harness for approximation-rate inequalities on matrix generators.

Every check returns a list of :class:`RateRecord`.  Upper-bound records pass
when ``bound - error >= -tol * bound``; lower-bound records when
``error - bound >= -tol * bound``.  ``report`` records document a comparison
without being enforced.  :func:`enforce` turns failures into
:class:`~semirate.errors.BoundViolation` with a replayable JSON witness.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from .bernstein import BernsteinFunction, Kind, derivatives_at_zero, eval_phi, is_in_phi
from .errors import BoundViolation, ConfigError, NumericalError, UnsupportedKind
from .families import dump_matrix
from .opcalc import (
    Generator, SemigroupBounds, certify_bounds, delta_fn, e_fn, power_fn,
)
from .quadrature import gauss_kronrod

DEFAULT_T_GRID = tuple(float(t) for t in np.geomspace(0.1, 100.0, 16))
DEFAULT_N_GRID = tuple(2 ** k for k in range(11))
DEFAULT_ALPHAS = (0.5, 1.0, 1.5, 2.0)
NOISE_FLOOR = 1e-13


def tolerance() -> float:
    """Relative slack for bound comparisons (``SEMIRATE_TOL``, default ``1e-9``)."""
    tol = float(os.environ.get("SEMIRATE_TOL", "1e-9"))
    if not tol > 0:
        raise ValueError("SEMIRATE_TOL must be positive")
    return tol


def thread_count() -> int:
    return max(1, int(os.environ.get("SEMIRATE_THREADS", "1")))


# -- records ---------------------------------------------------------------------

@dataclass(frozen=True)
class RateRecord:
    scheme: str
    phi: str
    alpha: float
    t: float
    n: int
    error: float
    bound: float
    kind: str = "upper"
    slope_axis: str = ""
    witness: str = ""

    @property
    def margin(self) -> float:
        if self.kind == "lower":
            return self.error - self.bound
        return self.bound - self.error

    def ok(self, tol: float | None = None) -> bool:
        if self.kind == "report":
            return True
        tol = tolerance() if tol is None else tol
        return self.margin >= -tol * abs(self.bound)

    def key(self):
        return (self.scheme, self.phi, self.alpha, self.t, self.n)


CSV_COLUMNS = ("scheme", "phi", "alpha", "t", "n", "error", "bound", "margin", "slope_axis")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v)) if math.isfinite(v) else str(v)
    return str(v)


def records_to_csv(records: Iterable[RateRecord]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        row = (r.scheme, r.phi, r.alpha, r.t, r.n, r.error, r.bound, r.margin, r.slope_axis)
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def records_to_json(records: Iterable[RateRecord]) -> list[dict]:
    return [{**asdict(r), "margin": r.margin} for r in records]


@dataclass(frozen=True)
class SlopeFit:
    axis: str
    points: int
    slope: float
    r2: float
    predicted: float
    tol: float = 0.1

    @property
    def confirming(self) -> bool:
        return self.r2 >= 0.98 and abs(self.slope - self.predicted) <= self.tol


def fit_order(records: Sequence[RateRecord], axis: str, predicted: float, tol: float = 0.1) -> SlopeFit:
    """Least-squares slope of ``log error`` against ``log axis``."""
    if axis not in ("n", "t"):
        raise ValueError("axis must be 'n' or 't'")
    if len(records) < 4:
        raise NumericalError("need at least four records for a slope fit")
    x = np.array([getattr(r, axis) for r in records], dtype=float)
    y = np.array([r.error for r in records], dtype=float)
    if np.unique(x).size < len(x):
        raise NumericalError(f"records must vary only along {axis}")
    if np.all(y <= NOISE_FLOOR):
        raise NumericalError("degenerate sweep: all errors at the noise floor")
    if np.any(y <= NOISE_FLOOR):
        raise NumericalError("sweep contains errors below the noise floor")
    res = linregress(np.log(x), np.log(y))
    return SlopeFit(axis, len(records), float(res.slope), float(res.rvalue ** 2), predicted, tol)


# -- witnesses and enforcement -------------------------------------------------------

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dump_witness(record: RateRecord, A: Generator | None, x: np.ndarray | None,
                 directory: str | Path) -> Path:
    doc = {
        "record": {**asdict(record), "margin": record.margin},
        "matrix": dump_matrix(A) if A is not None else None,
        "x": None if x is None else [[float(v.real), float(v.imag)] for v in np.asarray(x, dtype=complex)],
    }
    name = f"witness_{record.scheme}_{record.phi}_a{record.alpha:g}_t{record.t:.6g}_n{record.n}.json"
    path = Path(directory) / name.replace("/", "-").replace(":", "-")
    _atomic_write(path, json.dumps(doc, indent=1, sort_keys=True))
    return path


def violations(records: Iterable[RateRecord], tol: float | None = None) -> list[RateRecord]:
    return [r for r in records if not r.ok(tol)]


def enforce(records: Sequence[RateRecord], A: Generator | None = None, x: np.ndarray | None = None,
            witness_dir: str | Path | None = None, tol: float | None = None) -> None:
    """Raise :class:`BoundViolation` on the first failing record, dumping a witness."""
    bad = violations(records, tol)
    if not bad:
        return
    rec = bad[0]
    path = None
    if witness_dir is not None:
        path = str(dump_witness(rec, A, x, witness_dir))
    raise BoundViolation(
        f"{len(bad)} violation(s); first: {rec.scheme} phi={rec.phi} alpha={rec.alpha} "
        f"t={rec.t} n={rec.n} error={rec.error:.6e} bound={rec.bound:.6e}",
        record=rec, witness_path=path,
    )


# -- measurement helpers ------------------------------------------------------------

def _weighted(f: Callable, alpha: float) -> Callable:
    p = power_fn(-alpha)
    return lambda lam: p(lam) * f(lam)


def measure(A: Generator, f: Callable, alpha: float, x: np.ndarray | None = None) -> float:
    """``||f(A) A^{-alpha}||`` or, with a witness vector, ``||f(A) x|| / ||A^alpha x||``."""
    if x is None:
        return A.opnorm(_weighted(f, alpha))
    Ax = A.apply(power_fn(alpha)) @ x
    return float(np.linalg.norm(A.apply(f) @ x) / np.linalg.norm(Ax))


def witness_vector(A: Generator, alpha: float, seed: int = 0) -> np.ndarray:
    """``x = A^{-alpha} y`` for a random unit ``y``, so ``||A^alpha x|| = 1``."""
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(A.n) + 1j * rng.standard_normal(A.n)
    y /= np.linalg.norm(y)
    return A.apply(power_fn(-alpha)) @ y


def _d2(phi: BernsteinFunction) -> float:
    return abs(derivatives_at_zero(phi).d2)


def _sweep(points: Sequence, fn: Callable) -> list[RateRecord]:
    workers = thread_count()
    if workers == 1:
        out = [fn(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(fn, points))
    flat = [r for group in out for r in (group if isinstance(group, list) else [group])]
    return sorted(flat, key=RateRecord.key)


# -- general upper bounds -------------------------------------------------------

def require_class_phi(phi: BernsteinFunction):
    """Reject ``phi`` unless ``phi(0) = 0``, ``phi'(0+) = 1`` and ``phi''(0+)`` is finite."""
    if phi.kind is Kind.CUSTOM and not is_in_phi(phi, tol=1e-8):
        d = derivatives_at_zero(phi)
        raise ConfigError(f"{phi.name}: rate bounds need phi(0) = 0, phi'(0+) = 1 and finite phi''(0+); "
                          f"got {d.phi0:.6g}, {d.d1:.6g}, {d.d2:.6g}")


def check_general_upper(phi: BernsteinFunction, A: Generator, alpha: float,
                        t_grid: Sequence[float] = DEFAULT_T_GRID,
                        n_grid: Sequence[int] = DEFAULT_N_GRID,
                        x: np.ndarray | None = None,
                        bounds: SemigroupBounds | None = None) -> list[RateRecord]:
    """Scaled-scheme errors against ``8M (t|phi''|/n)^{alpha/2}`` and ``8M (t^2|phi''|/n)^{alpha/2}``.

    At ``alpha = 2`` the sharper ``M t|phi''|/(2n)`` and ``M t^2|phi''|/(2n)`` are
    recorded as well.
    """
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    require_class_phi(phi)
    M = (bounds or certify_bounds(A)).M0
    d2 = _d2(phi)

    def point(tn):
        t, n = tn
        ed = measure(A, delta_fn(phi, t, n), alpha, x)
        ee = measure(A, e_fn(phi, t, n), alpha, x)
        recs = [
            RateRecord("delta", phi.name, alpha, t, n, ed, 8 * M * (t * d2 / n) ** (alpha / 2)),
            RateRecord("e", phi.name, alpha, t, n, ee, 8 * M * (t * t * d2 / n) ** (alpha / 2)),
        ]
        if alpha == 2:
            recs += [
                RateRecord("delta-sharp", phi.name, alpha, t, n, ed, M * t * d2 / (2 * n)),
                RateRecord("e-sharp", phi.name, alpha, t, n, ee, M * t * t * d2 / (2 * n)),
            ]
        return recs

    return _sweep([(t, n) for t in t_grid for n in n_grid], point)


CLASSICAL = {
    # scheme: (phi kind, form, constant, uses t^2)
    "yosida": (Kind.YOSIDA, "delta", 16.0, False),
    "dunford-segal": (Kind.DUNFORD_SEGAL, "delta", 8.0, False),
    "euler": (Kind.EULER, "e", 8.0, True),
    "yosida-e": (Kind.YOSIDA, "e", 8.0, True),
}


def scheme_fn(scheme: str, t: float, n: int) -> Callable:
    kind, form, _, _ = CLASSICAL[scheme]
    phi = BernsteinFunction(kind)
    return delta_fn(phi, t, n) if form == "delta" else e_fn(phi, t, n)


def check_classical(A: Generator, alpha: float,
                    t_grid: Sequence[float] = DEFAULT_T_GRID,
                    n_grid: Sequence[int] = DEFAULT_N_GRID,
                    x: np.ndarray | None = None,
                    bounds: SemigroupBounds | None = None,
                    schemes: Sequence[str] = tuple(CLASSICAL)) -> list[RateRecord]:
    """Yosida (``16M (t/n)^{a/2}``), Dunford-Segal (``8M (t/n)^{a/2}``), Euler and the
    Yosida variant ``exp(-ntA (n + tA)^{-1})`` (both ``8M (t^2/n)^{a/2}``)."""
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    M = (bounds or certify_bounds(A)).M0

    def point(args):
        scheme, t, n = args
        _, _, const, squared = CLASSICAL[scheme]
        err = measure(A, scheme_fn(scheme, t, n), alpha, x)
        scale = t * t if squared else t
        return RateRecord(scheme, CLASSICAL[scheme][0].value, alpha, t, n, err,
                          const * M * (scale / n) ** (alpha / 2))

    return _sweep([(s, t, n) for s in schemes for t in t_grid for n in n_grid], point)


# -- analytic semigroups ----------------------------------------------------------

@dataclass(frozen=True)
class AnalyticConstants:
    M0: float
    M1: float
    M: float
    C0: float           # decay constant with the printed bracket
    C0_derived: float   # same with psi = 1 - phi' in the second term
    C1: float           # domain constant (2 M0 + M1) |phi''|
    C: float            # interpolated constant 2 (1 + M0) max(C0, C1)


def analytic_constants(phi: BernsteinFunction, bounds: SemigroupBounds) -> AnalyticConstants:
    if not bounds.analytic:
        raise UnsupportedKind("semigroup is not bounded analytic (M1 infinite)")
    M0, M1, M = bounds.M0, bounds.M1, bounds.M
    d2 = _d2(phi)
    dp1 = float(np.real(phi.derivative(1.0)))
    p1 = float(np.real(eval_phi(phi, 1.0)))
    first = 2 * (M0 + 2 * M1 + 2 * M1 ** 2) * d2
    C0 = first + 2 * M * (d2 / dp1 + dp1 / p1)
    C0d = first + 2 * M * (d2 / dp1 + (1 - dp1) / p1)
    C1 = (2 * M0 + M1) * d2
    C = 2 * (1 + M0) * max(C0, C1)
    return AnalyticConstants(M0, M1, M, C0, C0d, C1, C)


@dataclass
class AnalyticReport:
    constants: AnalyticConstants
    records: list[RateRecord] = field(default_factory=list)
    fits: dict = field(default_factory=dict)


def check_analytic(phi: BernsteinFunction, A: Generator,
                   alphas: Sequence[float] = (0.0, 0.5, 1.0),
                   t_grid: Sequence[float] = DEFAULT_T_GRID,
                   n_grid: Sequence[int] = DEFAULT_N_GRID,
                   x: np.ndarray | None = None,
                   bounds: SemigroupBounds | None = None,
                   fit_t: float = 1.0, fit_n: Sequence[int] = tuple(2 ** k for k in range(3, 11))) -> AnalyticReport:
    """Improved rates for bounded analytic semigroups.

    * ``||Delta_t(A) x|| <= (2 M0 + M1)|phi''| ||A x||``           (``analytic-domain``)
    * ``t ||Delta_t(A)|| <= C0``                                  (``analytic-decay``)
    * ``||Delta_{t,n}(A) x|| <= C/(n t^{1-alpha}) ||A^alpha x||``  (``analytic-delta``)
    * ``||E_{t,n}(A) x|| <= C t^alpha / n ||A^alpha x||``          (``analytic-e``)
    """
    bounds = bounds or certify_bounds(A)
    k = analytic_constants(phi, bounds)
    rep = AnalyticReport(k)
    recs = []
    for t in t_grid:
        recs.append(RateRecord("analytic-domain", phi.name, 1.0, t, 1,
                               measure(A, delta_fn(phi, t), 1.0, x), k.C1))
        e0 = A.opnorm(delta_fn(phi, t))
        recs.append(RateRecord("analytic-decay", phi.name, 0.0, t, 1, e0, k.C0 / t))
        recs.append(RateRecord("analytic-decay-derived", phi.name, 0.0, t, 1, e0, k.C0_derived / t,
                               kind="report"))

    def point(args):
        alpha, t, n = args
        return [
            RateRecord("analytic-delta", phi.name, alpha, t, n,
                       measure(A, delta_fn(phi, t, n), alpha, x), k.C / (n * t ** (1 - alpha)), slope_axis="n"),
            RateRecord("analytic-e", phi.name, alpha, t, n,
                       measure(A, e_fn(phi, t, n), alpha, x), k.C * t ** alpha / n, slope_axis="n"),
        ]

    recs += _sweep([(a, t, n) for a in alphas for t in t_grid for n in n_grid], point)
    for alpha in alphas:
        sweep = [RateRecord("analytic-delta", phi.name, alpha, fit_t, n,
                            measure(A, delta_fn(phi, fit_t, n), alpha, x), math.nan, kind="report",
                            slope_axis="n") for n in fit_n]
        rep.fits[alpha] = fit_order(sweep, "n", -1.0)
    rep.records = sorted(recs, key=RateRecord.key)
    return rep


def check_building_blocks(phi: BernsteinFunction, psi: BernsteinFunction, A: Generator,
                          t_grid: Sequence[float] = DEFAULT_T_GRID,
                          s_grid: Sequence[float] = tuple(np.geomspace(0.01, 100.0, 9)),
                          bounds: SemigroupBounds | None = None) -> list[RateRecord]:
    """Auxiliary inequalities behind the analytic ``C/t`` decay.

    ``psi`` must be a bounded Bernstein function with ``psi(0) = 0``.
    """
    bounds = bounds or certify_bounds(A)
    M0, M1, M = bounds.M0, bounds.M1, bounds.M
    d2 = _d2(phi)
    dpsi = derivatives_at_zero(psi)
    if abs(dpsi.phi0) > 1e-12 or not math.isfinite(dpsi.d1):
        raise ValueError("psi must satisfy psi(0) = 0 and psi'(0+) < inf")
    recs = []
    first = (2 * (M0 + 2 * M1) + 4 * M1 ** 2) * d2
    dp1 = float(np.real(phi.derivative(1.0)))
    p1 = float(np.real(eval_phi(phi, 1.0)))
    psi1 = float(np.real(eval_phi(psi, 1.0)))
    b68 = 2 * M * (dpsi.d1 / dp1 + psi1 / p1)
    b69 = 2 * M * (d2 / dp1 + (1 - dp1) / p1)
    b69_printed = 2 * M * (d2 / dp1 + dp1 / p1)
    for t in t_grid:
        f = lambda lam, t=t: np.exp(-t * lam) - phi.derivative(lam) * np.exp(-t * phi(lam))
        recs.append(RateRecord("derivative-weighted", phi.name, 0.0, t, 1, t * A.opnorm(f), first))
        g = lambda lam, t=t: eval_phi(psi, lam) * np.exp(-t * phi(lam))
        recs.append(RateRecord("bounded-bernstein-decay", f"{phi.name}|{psi.name}", 0.0, t, 1,
                               t * A.opnorm(g), b68))
        h = lambda lam, t=t: (1 - phi.derivative(lam)) * np.exp(-t * phi(lam))
        eh = t * A.opnorm(h)
        recs.append(RateRecord("derivative-gap", phi.name, 0.0, t, 1, eh, b69))
        recs.append(RateRecord("derivative-gap-printed", phi.name, 0.0, t, 1, eh, b69_printed, kind="report"))
    for s in s_grid:
        for tau in s_grid:
            f = lambda lam, s=s, tau=tau: (1 - np.exp(-s * lam)) * np.exp(-tau * lam)
            recs.append(RateRecord("smoothing-difference", f"s={s:.6g}", 0.0, tau, 1,
                                   A.opnorm(f), 2 * M * s / (tau + s)))
    recs += scalar_decay_records(phi, psi, t_grid)
    return recs


def scalar_decay_constant(p: BernsteinFunction, psi: BernsteinFunction) -> float:
    """``inf_a [ psi'(0+)/p'(a) + (psi(inf) - psi(a))/p(a) ]`` for ``q = psi'``."""
    dpsi0 = float(np.real(psi.derivative(0.0)))
    psi_inf = float(np.real(eval_phi(psi, 1e12)))

    def objective(la):
        a = math.exp(la)
        dp = float(np.real(p.derivative(a)))
        if dp <= 0:
            return math.inf
        return (dpsi0 / dp
                + (psi_inf - float(np.real(eval_phi(psi, a)))) / float(np.real(eval_phi(p, a))))

    grid = np.linspace(-8, 8, 161)
    vals = [objective(g) for g in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded")
    return float(min(res.fun, vals[i]))


def scalar_decay_records(p: BernsteinFunction, psi: BernsteinFunction,
                         t_grid: Sequence[float]) -> list[RateRecord]:
    """``t int_0^inf e^{-t p(s)} |psi'(s)| ds <= C`` as a scalar inequality."""
    C = scalar_decay_constant(p, psi)
    out = []
    for t in t_grid:
        f = lambda s: math.exp(-t * float(np.real(eval_phi(p, s)))) * abs(float(np.real(psi.derivative(s))))
        val, _ = quad(f, 0.0, math.inf, epsabs=1e-13, epsrel=1e-11, limit=400)
        out.append(RateRecord("scalar-decay", f"{p.name}|{psi.name}", 0.0, t, 1, t * val, C))
    return out


def check_operator_interpolation(A: Generator, B: np.ndarray, alphas: Sequence[float],
                                 bounds: SemigroupBounds | None = None, label: str = "B",
                                 t: float = math.nan) -> list[RateRecord]:
    """``||A^{-alpha} B|| <= 2 (1 + M0) a^{1-alpha} b^alpha`` with ``a = ||B||``, ``b = ||A^{-1} B||``."""
    if not A.injective:
        raise ValueError("generator must be injective")
    M0 = (bounds or certify_bounds(A)).M0
    a = float(np.linalg.norm(B, 2))
    b = float(np.linalg.norm(A.apply(power_fn(-1.0)) @ B, 2))
    out = []
    for alpha in alphas:
        if not 0 <= alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        lhs = float(np.linalg.norm(A.apply(power_fn(-alpha)) @ B, 2))
        out.append(RateRecord("operator-interpolation", label, alpha, t, 1, lhs,
                              2 * (1 + M0) * a ** (1 - alpha) * b ** alpha))
    return out


def check_interpolated_decay(phi: BernsteinFunction, A: Generator, alphas: Sequence[float],
                             t_grid: Sequence[float] = DEFAULT_T_GRID,
                             bounds: SemigroupBounds | None = None) -> list[RateRecord]:
    """``||A^{-alpha} Delta_t(A)|| <= 2(1+M0) C0^{1-alpha} C1^alpha t^{alpha-1} <= C t^{alpha-1}``."""
    bounds = bounds or certify_bounds(A)
    k = analytic_constants(phi, bounds)
    out = []
    for t in t_grid:
        B = A.apply(delta_fn(phi, t))
        out += check_operator_interpolation(A, B, alphas, bounds, phi.name, t)
        for alpha in alphas:
            lhs = measure(A, delta_fn(phi, t), alpha)
            out.append(RateRecord("interpolated-decay", phi.name, alpha, t, 1, lhs,
                                  2 * (1 + k.M0) * k.C0 ** (1 - alpha) * k.C1 ** alpha * t ** (alpha - 1)))
            out.append(RateRecord("interpolated-decay-uniform", phi.name, alpha, t, 1, lhs,
                                  k.C * t ** (alpha - 1)))
    return sorted(out, key=RateRecord.key)


# -- lower bounds -----------------------------------------------------------------

@dataclass(frozen=True)
class LowerConstants:
    c: float
    T: float
    method: str
    r: float = math.nan
    d: float = math.nan


def _require_nontrivial(phi: BernsteinFunction):
    require_class_phi(phi)
    if phi.kind is Kind.IDENTITY or _d2(phi) == 0:
        raise UnsupportedKind("lower bounds need phi(z) != z")


def small_jump_moment(phi: BernsteinFunction, r: float) -> float:
    """``d = int_{(0, r)} s^2 mu(ds)``."""
    if phi.kind is Kind.DUNFORD_SEGAL:
        return 1.0 if r > 1 else 0.0
    if phi.kind is Kind.YOSIDA:
        return 2.0 - math.exp(-r) * (r * r + 2 * r + 2)
    if phi.kind is Kind.EULER:
        return 1.0 - math.exp(-r) * (1 + r)
    mu = phi.triple.mu
    d = sum(w * x * x for x, w in mu.atoms if x < r)
    if mu.density is not None:
        edges = [0.0, *[b for b in mu.breakpoints if b < r], min(r, mu.support_end)]
        for lo, hi in zip(edges[:-1], edges[1:]):
            d += gauss_kronrod(lambda s: s * s * mu.density(s), lo, hi)[0]
    return float(d)


def imaginary_axis_constants(phi: BernsteinFunction, r: float = 2.0) -> LowerConstants:
    """``c = 1 - exp(-2d/pi^2)``, ``T = r^2/pi^2`` with ``d`` the small-jump second moment."""
    _require_nontrivial(phi)
    d = small_jump_moment(phi, r)
    if d <= 0:
        raise ValueError(f"mu puts no mass on (0, {r}); choose a larger r")
    return LowerConstants(1.0 - math.exp(-2.0 * d / math.pi ** 2), r * r / math.pi ** 2, "imag-axis", r, d)


def _secant_gap(phi: BernsteinFunction, tau: np.ndarray) -> np.ndarray:
    """``(exp(-phi(tau)/tau) - e^{-1}) / tau`` in a cancellation-aware form."""
    ph = np.real(eval_phi(phi, tau.astype(complex)))
    return math.exp(-1.0) * np.expm1((tau - ph) / tau) / tau


def positive_axis_constants(phi: BernsteinFunction, fraction: float = 0.5) -> LowerConstants:
    """``c = fraction * |phi''|/(2e)`` and the largest ``delta`` with the secant gap
    ``>= c`` on ``(0, delta]``; ``T = 1/delta``."""
    _require_nontrivial(phi)
    c = fraction * _d2(phi) / (2 * math.e)
    tau = np.geomspace(1e-4, 1e3, 4001)
    g = _secant_gap(phi, tau)
    bad = np.nonzero(g < c)[0]
    if bad.size and bad[0] == 0:
        raise NumericalError("secant gap below c at the smallest sample")
    delta = float(tau[bad[0] - 1]) if bad.size else float(tau[-1])
    return LowerConstants(c, 1.0 / delta, "pos-reals")


def spectrum_points(kind: str, k: int, lo: float = 1e-3, hi: float = 20.0) -> np.ndarray:
    s = np.geomspace(lo, hi, k)
    if kind == "imag-axis":
        return 1j * s
    if kind == "pos-reals":
        return s.astype(complex)
    raise ValueError(f"unknown spectrum kind {kind!r}")


def _sup(lam: np.ndarray, f: Callable, alpha: float) -> tuple[float, int]:
    v = np.abs(_weighted(f, alpha)(lam))
    i = int(np.argmax(v))
    return float(v[i]), i


def refined_sup(kind: str, f: Callable, alpha: float, k0: int = 256, k_max: int = 1 << 16,
                lo: float = 1e-3, hi: float = 20.0) -> tuple[float, int]:
    """Sup of ``|lam^{-alpha} f(lam)|`` over a sampled spectrum, doubling the grid
    until the maximizer moves by less than one cell."""
    k = k0
    lam = spectrum_points(kind, k, lo, hi)
    val, i = _sup(lam, f, alpha)
    while k < k_max:
        k2 = 2 * k - 1
        lam2 = spectrum_points(kind, k2, lo, hi)
        val2, i2 = _sup(lam2, f, alpha)
        cell = math.log(hi / lo) / (k2 - 1)
        moved = abs(math.log(abs(lam2[i2])) - math.log(abs(lam[i]))) if lam[i] != 0 else math.inf
        k, lam, val, i = k2, lam2, val2, i2
        if moved < cell and abs(val2 - val) <= 1e-3 * val2:
            break
    return val, k


@dataclass
class LowerReport:
    constants: LowerConstants
    records: list[RateRecord]
    grid_sizes: list[int]


def check_lower_bounds(phi: BernsteinFunction, spectrum_kind: str,
                       alphas: Sequence[float] = (0.0, 1.0, 2.0),
                       t_grid: Sequence[float] | None = None,
                       n_grid: Sequence[int] = (1, 4, 16),
                       r: float = 2.0) -> LowerReport:
    """Sharpness: the measured sup over a sampled spectrum dominates
    ``c t^{alpha/2}`` (imaginary axis) or ``c t^{alpha-1}`` (positive reals)."""
    _require_nontrivial(phi)
    if spectrum_kind == "imag-axis":
        k = imaginary_axis_constants(phi, r)
        base = lambda t, a: k.c * t ** (a / 2)
        dscaled = lambda t, n, a: k.c * (t / n) ** (a / 2)
        escaled = lambda t, n, a: k.c * (t * t / n) ** (a / 2)
    elif spectrum_kind == "pos-reals":
        k = positive_axis_constants(phi)
        base = lambda t, a: k.c * t ** (a - 1)
        dscaled = lambda t, n, a: k.c * t ** (a - 1) / n
        escaled = lambda t, n, a: k.c * t ** a / n
    else:
        raise ValueError(f"unknown spectrum kind {spectrum_kind!r}")
    if t_grid is None:
        t_grid = tuple(float(t) for t in np.geomspace(k.T, 100.0, 12))
    recs, sizes = [], []
    tag = "lower-imag" if spectrum_kind == "imag-axis" else "lower-pos"
    for alpha in alphas:
        for t in t_grid:
            if t < k.T * (1 - 1e-12):
                continue
            v, kk = refined_sup(spectrum_kind, delta_fn(phi, t), alpha)
            sizes.append(kk)
            recs.append(RateRecord(tag, phi.name, alpha, t, 1, v, base(t, alpha), kind="lower"))
            for n in n_grid:
                if n * t >= k.T:
                    v, kk = refined_sup(spectrum_kind, delta_fn(phi, t, n), alpha)
                    sizes.append(kk)
                    recs.append(RateRecord(f"{tag}-delta", phi.name, alpha, t, n, v, dscaled(t, n, alpha),
                                           kind="lower"))
                if n >= k.T:
                    v, kk = refined_sup(spectrum_kind, e_fn(phi, t, n), alpha)
                    sizes.append(kk)
                    recs.append(RateRecord(f"{tag}-e", phi.name, alpha, t, n, v, escaled(t, n, alpha),
                                           kind="lower"))
    return LowerReport(k, sorted(recs, key=RateRecord.key), sizes)


def witness_value(phi: BernsteinFunction, spectrum_kind: str, t: float, alpha: float) -> float:
    """``|lam^{-alpha} Delta_t(lam)|`` at ``lam = i/sqrt(t)`` or ``lam = 1/t``."""
    lam = np.array([1j / math.sqrt(t) if spectrum_kind == "imag-axis" else 1.0 / t], dtype=complex)
    return float(np.abs(_weighted(delta_fn(phi, t), alpha)(lam))[0])


def alpha_breakdown(phi: BernsteinFunction, alpha: float = 2.5, t: float = 1.0,
                    refinements: int = 5, s_min: float = 1.0, s_max: float = 10.0,
                    k: int = 64) -> list[float]:
    """Sup of ``|lam^{-alpha} Delta_t(lam)|`` on positive spectra whose smallest
    point halves at each refinement; diverges when ``alpha > 2``."""
    out = []
    for j in range(refinements + 1):
        lam = np.geomspace(s_min * 2.0 ** -j, s_max, k + 8 * j).astype(complex)
        out.append(_sup(lam, delta_fn(phi, t), alpha)[0])
    return out
