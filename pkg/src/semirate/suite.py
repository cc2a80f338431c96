"""Table builders shared by the command line and the acceptance tests.

Each builder returns a :class:`Table` whose rows are plain Python values,
formatted with ``repr`` so that reruns with the same inputs are byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from . import rates
from .a1plus import C1, C2, delta_fractional_bounds, delta_kernel, fractional_delta, make_v
from .bernstein import DUNFORD_SEGAL, EULER, YOSIDA, BernsteinFunction, derivatives_at_zero
from .families import parse_family
from .opcalc import DoubledGenerator, certify_bounds, doubled_bound_transfer, e_op, resolvent_power
from .specfun import (
    build_cbeta_table, c_beta, laguerre_abs_mean, laguerre_sq_mean_01, watson_identity_residual,
)

BUILTIN_PHIS = (YOSIDA, DUNFORD_SEGAL, EULER)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


@dataclass
class Table:
    name: str
    title: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    ok: bool = True
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(_cell(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def frange(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    spec = spec.strip()
    if not spec:
        raise ValueError("empty grid")
    if ":" in spec:
        parts = [float(p) for p in spec.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad range {spec!r}; expected start:stop:step")
        k = int(math.floor((parts[1] - parts[0]) / parts[2] + 1e-9))
        return [round(parts[0] + i * parts[2], 12) for i in range(k + 1)]
    return [float(p) for p in spec.split(",") if p.strip()]


# -- constants ---------------------------------------------------------------------

def constants_table(betas: Sequence[float]) -> Table:
    tab = build_cbeta_table(betas)
    t = Table("constants", "Interpolation constants c_beta with the bound 2^(beta+1)",
              ("beta", "c_beta", "err", "upper_bound", "ok"))
    for e in tab.rows():
        t.rows.append((e.beta, e.value, e.err, e.upper_bound, e.ok))
    t.ok = tab.all_ok
    return t


def algebra_constants_table() -> Table:
    t = Table("algebra_constants", "Closed-form constants of the measure algebra",
              ("quantity", "beta", "tau", "computed", "expected", "abs_err", "tol", "ok"))
    for name, beta, got, want in (("c_beta", 1.0, c_beta(1.0), C1), ("c_beta", 2.0, c_beta(2.0), C2)):
        err = abs(got - want)
        t.rows.append((name, beta, math.nan, got, want, err, 1e-8, err <= 1e-8))
    for beta in (0.5, 1.0, 2.0, 3.0):
        for tau in (0.5, 1.0, 2.0):
            got = make_v(beta, tau).norm()
            want = tau ** -beta
            err = abs(got - want)
            t.rows.append(("v_norm", beta, tau, got, want, err, 1e-10, err <= 1e-10))
    t.ok = all(r[-1] for r in t.rows)
    return t


def exactness_table(ts: Sequence[float] = (0.5, 1.0, 2.0, 5.0)) -> Table:
    t = Table("second_order_norm", "Norm of z^-2 Delta_t equals t|phi''(0+)|/2",
              ("phi", "t", "norm", "expected", "abs_err", "tol", "ok"))
    for phi in BUILTIN_PHIS:
        d2 = abs(derivatives_at_zero(phi).d2)
        for s in ts:
            got = delta_kernel(phi, s).element().norm()
            want = s * d2 / 2
            err = abs(got - want)
            t.rows.append((phi.name, s, got, want, err, 1e-6 * s, err <= 1e-6 * s))
    t.ok = all(r[-1] for r in t.rows)
    return t


def fractional_norms_table(ts: Sequence[float] = (0.5, 1.0, 2.0, 5.0),
                           alphas: Sequence[float] = (0.5, 1.0, 1.5, 2.0),
                           phis: Sequence[BernsteinFunction] = BUILTIN_PHIS) -> Table:
    t = Table("fractional_norms", "Norm of z^-alpha Delta_t against the interpolation and relaxed bounds",
              ("phi", "t", "alpha", "norm", "interpolation_bound", "relaxed_bound", "ok"))
    tol = rates.tolerance()
    for phi in phis:
        for s in ts:
            for a in alphas:
                nv = fractional_delta(phi, s, a).norm()
                b = delta_fractional_bounds(phi, s, a)
                ok = nv <= b.tight * (1 + tol) and b.tight <= b.relaxed * (1 + tol)
                t.rows.append((phi.name, s, a, nv, b.tight, b.relaxed, ok))
    t.ok = all(r[-1] for r in t.rows)
    return t


# -- rates ------------------------------------------------------------------------

def _record_table(name: str, title: str, records: Sequence[rates.RateRecord], family: str | None = None) -> Table:
    cols = ("family",) + rates.CSV_COLUMNS + ("kind", "ok") if family is not None else rates.CSV_COLUMNS + ("kind", "ok")
    t = Table(name, title, cols)
    for r in records:
        row = (r.scheme, r.phi, r.alpha, r.t, r.n, r.error, r.bound, r.margin, r.slope_axis, r.kind, r.ok())
        t.rows.append(((family,) + row) if family is not None else row)
    t.ok = all(r.ok() for r in records)
    return t


def upper_families(seed: int) -> tuple[str, ...]:
    return ("diag-imag(64,10)", "diag-pos(64,10)", f"random-normal(32,{seed})")


def upper_rates_table(seed: int = 42, alphas: Sequence[float] = rates.DEFAULT_ALPHAS) -> Table:
    t = Table("upper_rates", "Upper rate bounds for the scaled schemes over the default sweep",
              ("family",) + rates.CSV_COLUMNS + ("kind", "ok"))
    for fam in upper_families(seed):
        A = parse_family(fam)
        b = certify_bounds(A)
        for a in alphas:
            recs = []
            for phi in BUILTIN_PHIS:
                recs += rates.check_general_upper(phi, A, a, bounds=b)
            recs += rates.check_classical(A, a, bounds=b)
            sub = _record_table("", "", recs, fam)
            t.rows += sub.rows
            t.ok &= sub.ok
    return t


SLOPE_SETUP = {
    # scheme: time at which the maximizer stays inside diag-imag(64,10) for n in 8..1024
    "euler": 4.0,
    "dunford-segal": 16.0,
    "yosida": 16.0,
}
SLOPE_N = tuple(2 ** k for k in range(3, 11))


def slopes_table() -> Table:
    t = Table("slopes", "Fitted convergence order in n on diag-imag(64,10)",
              ("scheme", "alpha", "t", "points", "slope", "r2", "predicted", "ok"))
    A = parse_family("diag-imag(64,10)")
    b = certify_bounds(A)
    for scheme, s in SLOPE_SETUP.items():
        for a in (1.0, 2.0):
            recs = rates.check_classical(A, a, t_grid=[s], n_grid=SLOPE_N, bounds=b, schemes=[scheme])
            fit = rates.fit_order(recs, "n", -a / 2)
            t.rows.append((scheme, a, s, fit.points, fit.slope, fit.r2, fit.predicted, fit.confirming))
    t.ok = all(r[-1] for r in t.rows)
    return t


def analytic_tables() -> list[Table]:
    A = parse_family("diag-pos(64,10)")
    b = certify_bounds(A)
    consts = Table("analytic_constants", "Analytic-semigroup constants on diag-pos(64,10)",
                   ("phi", "M0", "M1", "M", "C0", "C0_derived", "C1", "C", "sup_t_t_norm_delta", "ok"))
    records, fits = [], Table("analytic_slopes", "Fitted order in n for the analytic rate on diag-pos(64,10)",
                              ("phi", "alpha", "t", "points", "slope", "r2", "predicted", "ok"))
    blocks = []
    for phi in BUILTIN_PHIS:
        rep = rates.check_analytic(phi, A, bounds=b)
        k = rep.constants
        sup = max(r.error * r.t for r in rep.records if r.scheme == "analytic-decay")
        consts.rows.append((phi.name, k.M0, k.M1, k.M, k.C0, k.C0_derived, k.C1, k.C, sup, sup <= k.C0))
        records += rep.records
        for a, f in sorted(rep.fits.items()):
            fits.rows.append((phi.name, a, 1.0, f.points, f.slope, f.r2, f.predicted, f.confirming))
        blocks += rates.check_building_blocks(phi, DUNFORD_SEGAL, A, bounds=b)
        blocks += rates.check_interpolated_decay(phi, A, (0.0, 0.25, 0.5, 0.75, 1.0), bounds=b)
    consts.ok = all(r[-1] for r in consts.rows)
    fits.ok = all(r[-1] for r in fits.rows)
    sweep = _record_table("analytic_rates", "Analytic rate bounds on diag-pos(64,10)", records)
    aux = _record_table("analytic_building_blocks",
                        "Auxiliary analytic estimates and operator interpolation on diag-pos(64,10)", blocks)
    printed = [r for r in blocks if r.scheme == "derivative-gap-printed"]
    aux.notes.append("printed derivative-gap bracket holds: "
                     + ("yes" if all(r.margin >= 0 for r in printed) else "no"))
    return [consts, sweep, fits, aux]


def lower_bounds_tables() -> list[Table]:
    consts = Table("lower_constants", "Lower-bound constants c and T per phi and spectrum",
                   ("phi", "spectrum", "c", "T", "r", "d", "max_grid_points", "ok"))
    recs = []
    for phi in BUILTIN_PHIS:
        for kind in ("imag-axis", "pos-reals"):
            rep = rates.check_lower_bounds(phi, kind)
            ok = all(r.ok() for r in rep.records)
            k = rep.constants
            consts.rows.append((phi.name, kind, k.c, k.T, k.r, k.d, max(rep.grid_sizes), ok))
            recs += rep.records
    consts.ok = all(r[-1] for r in consts.rows)
    return [consts, _record_table("lower_bounds", "Lower bounds on sampled spectra", recs)]


def breakdown_table(refinements: int = 5) -> Table:
    t = Table("breakdown", "Growth of sup |lam^-2.5 Delta_1(lam)| as the spectrum refines toward 0",
              ("refinement", "smallest_lambda", "sup", "growth", "ok"))
    vals = rates.alpha_breakdown(DUNFORD_SEGAL, 2.5, 1.0, refinements)
    for j, v in enumerate(vals):
        g = v / vals[j - 1] if j else math.nan
        t.rows.append((j, 2.0 ** -j, v, g, True if j == 0 else g >= 1.3))
    t.ok = all(r[-1] for r in t.rows)
    return t


def appendix_table(ms: Sequence[int] = tuple(range(1, 31))) -> Table:
    t = Table("appendix", "Laguerre-kernel estimates for integer beta",
              ("quantity", "m", "s", "value", "bound", "ok"))
    for m in ms:
        v = laguerre_abs_mean(m)
        t.rows.append(("abs_mean", m, math.nan, v, 2 * math.sqrt(m), v <= 2 * math.sqrt(m)))
        c = c_beta(float(m))
        t.rows.append(("c_m", m, math.nan, c, 1 + 2 * math.sqrt(m), c <= 1 + 2 * math.sqrt(m)))
        t.rows.append(("c_m_stated", m, math.nan, c, 2 * (1 + 2 * math.sqrt(m)), c <= 2 * (1 + 2 * math.sqrt(m))))
        q = laguerre_sq_mean_01(m)
        t.rows.append(("sq_mean_01", m, math.nan, q, 2.5 * m, q <= 2.5 * m))
    for m in range(1, 6):
        for s in (0.25, 0.5, 1.0):
            r = watson_identity_residual(m, s)
            t.rows.append(("watson_residual", m, s, r, 1e-7, r <= 1e-7))
    t.ok = all(r[-1] for r in t.rows)
    return t


def doubling_table(ts: Sequence[float] = (0.5, 1.0, 2.0)) -> Table:
    t = Table("doubling", "Doubled generator [[A, A], [0, A]] on diag-pos(16,10)",
              ("check", "phi", "t", "value", "bound", "ok"))
    A = parse_family("diag-pos(16,10)")
    D = DoubledGenerator(A)
    blk = D.block
    eye = np.eye(blk.shape[0])
    oracles = {
        "dunford-segal": lambda s: sla.expm(-s * (eye - sla.expm(-blk))),
        "yosida": lambda s: sla.expm(-s * blk @ np.linalg.inv(eye + blk)),
        "euler": lambda s: sla.expm(-s * sla.logm(eye + blk)),
    }
    for s in ts:
        ref = sla.expm(-s * blk)
        rel = np.linalg.norm(D.semigroup(s) - ref, 2) / np.linalg.norm(ref, 2)
        t.rows.append(("block-exponential", "", s, rel, 1e-9, rel <= 1e-9))
        for phi in BUILTIN_PHIS:
            ref = oracles[phi.name](s)
            rel = np.linalg.norm(D.subordinated_semigroup(phi, s) - ref, 2) / np.linalg.norm(ref, 2)
            t.rows.append(("block-subordination", phi.name, s, rel, 1e-9, rel <= 1e-9))
    tr = doubled_bound_transfer(A)
    t.rows.append(("transfer-semigroup", "", math.nan, tr.sup_semigroup, tr.bound_semigroup,
                   tr.sup_semigroup <= tr.bound_semigroup * (1 + 1e-12)))
    t.rows.append(("transfer-analytic", "", math.nan, tr.sup_analytic, tr.bound_analytic,
                   tr.sup_analytic <= tr.bound_analytic * (1 + 1e-12)))
    t.ok = all(r[-1] for r in t.rows)
    return t


def scheme_equivalence_residual(A, t: float, n: int) -> float:
    """Relative gap between the spectral Euler operator and repeated resolvent solves."""
    a = e_op(EULER, A, t, n) + sla.expm(-t * A.matrix)
    b = resolvent_power(A, t, n)
    return float(np.linalg.norm(a - b, 2) / np.linalg.norm(b, 2))


def all_tables(seed: int = 42) -> list[Table]:
    out = [
        constants_table(frange("0.25:10:0.25")),
        algebra_constants_table(),
        exactness_table(),
        fractional_norms_table(),
        upper_rates_table(seed),
        slopes_table(),
    ]
    out += analytic_tables()
    out += lower_bounds_tables()
    out += [breakdown_table(), appendix_table(), doubling_table()]
    return out


def summary_markdown(tables: Sequence[Table], seed: int) -> str:
    lines = [f"# Verification summary (seed {seed})", "",
             "| table | claim | rows | status |", "|---|---|---|---|"]
    for t in tables:
        title = t.title.replace("|", "\\|")
        lines.append(f"| `{t.name}.csv` | {title} | {len(t.rows)} | {'PASS' if t.ok else 'FAIL'} |")
    notes = [f"- {t.name}: {n}" for t in tables for n in t.notes]
    if notes:
        lines += ["", "## Notes", *notes]
    return "\n".join(lines) + "\n"


__all__ = [name for name in dir() if not name.startswith("_")]
