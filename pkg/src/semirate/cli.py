"""Command-line entry point.

Exit codes: 0 all checks pass, 1 a bound is violated, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import rates, suite
from .bernstein import BernsteinFunction, LevyTriple, by_name
from .errors import BoundViolation, ConfigError, NumericalError, SemirateError, UnsupportedKind
from .families import resolve_matrix

log = logging.getLogger("semirate")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    scheme: str | None = None
    phi: list[str] = field(default_factory=list)
    phi_file: str | None = None
    matrix: str | None = None
    alphas: list[float] = field(default_factory=list)
    t_grid: list[float] = field(default_factory=list)
    n_grid: list[int] = field(default_factory=list)
    betas: list[float] = field(default_factory=list)
    out: str = "csv"
    output: str | None = None
    fail_fast: bool = False
    seed: int = 42
    tol: float | None = None

    def validate(self):
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("--tol must be positive")
        for name in ("alphas", "t_grid", "n_grid", "betas"):
            if getattr(self, name) is None:
                raise ConfigError(f"{name.replace('_', '-')} must not be empty")
        if any(t <= 0 for t in self.t_grid):
            raise ConfigError("t-grid values must be positive")
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("n-grid values must be >= 1")
        if self.out not in ("csv", "json"):
            raise ConfigError("--out must be csv or json")


# -- argument parsing ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _grid(kind):
    def parse(text: str):
        try:
            vals = suite.frange(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        if kind is int:
            if any(v != int(v) for v in vals):
                raise argparse.ArgumentTypeError("n-grid must be integers")
            return [int(v) for v in vals]
        return vals
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semirate", description="Bernstein-function semigroup approximation: rates and constants.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--output", "-o", help="write to this path instead of stdout")
        if out:
            sp.add_argument("--out", choices=("csv", "json"), default="csv")
        sp.add_argument("--tol", type=float, help="relative slack for bound checks (default SEMIRATE_TOL or 1e-9)")

    sp = sub.add_parser("constants", help="c_beta table")
    sp.add_argument("--beta", dest="betas", type=_grid(float), default=suite.frange("0.25:10:0.25"))
    common(sp)

    sp = sub.add_parser("norms", help="norms of z^-alpha Delta_t and their interpolation bounds")
    sp.add_argument("--phi", action="append", choices=("yosida", "dunford-segal", "euler"))
    sp.add_argument("--t-grid", type=_grid(float), default=[0.5, 1.0, 2.0, 5.0])
    sp.add_argument("--alpha", dest="alphas", type=_grid(float), default=[0.5, 1.0, 1.5, 2.0])
    common(sp)

    sp = sub.add_parser("rates", help="upper rate bounds for a scheme on a matrix")
    sp.add_argument("--scheme", choices=("yosida", "dunford-segal", "euler", "custom"), required=True)
    sp.add_argument("--phi-file", help="JSON Levy triple for --scheme custom")
    sp.add_argument("--matrix", required=True, help="family spec such as diag-imag(64,10) or a JSON file")
    sp.add_argument("--alpha", dest="alphas", type=_grid(float), default=list(rates.DEFAULT_ALPHAS))
    sp.add_argument("--t-grid", type=_grid(float), default=list(rates.DEFAULT_T_GRID))
    sp.add_argument("--n-grid", type=_grid(int), default=list(rates.DEFAULT_N_GRID))
    sp.add_argument("--fail-fast", action="store_true")
    common(sp)

    sp = sub.add_parser("analytic", help="improved rates for bounded analytic semigroups")
    sp.add_argument("--phi", action="append", choices=("yosida", "dunford-segal", "euler"))
    sp.add_argument("--matrix", default="diag-pos(64,10)")
    sp.add_argument("--alpha", dest="alphas", type=_grid(float), default=[0.0, 0.5, 1.0])
    sp.add_argument("--t-grid", type=_grid(float), default=list(rates.DEFAULT_T_GRID))
    sp.add_argument("--n-grid", type=_grid(int), default=list(rates.DEFAULT_N_GRID))
    sp.add_argument("--fail-fast", action="store_true")
    common(sp)

    sp = sub.add_parser("lower-bounds", help="sharpness lower bounds on sampled spectra")
    sp.add_argument("--phi", action="append", choices=("yosida", "dunford-segal", "euler", "identity"))
    sp.add_argument("--spectrum", choices=("imag-axis", "pos-reals"), action="append")
    sp.add_argument("--alpha", dest="alphas", type=_grid(float), default=[0.0, 1.0, 2.0])
    sp.add_argument("--n-grid", type=_grid(int), default=[1, 4, 16])
    sp.add_argument("--fail-fast", action="store_true")
    common(sp)

    sp = sub.add_parser("appendix", help="Laguerre-kernel estimates and the Watson identity")
    common(sp)

    sp = sub.add_parser("reproduce", help="run every verification table and write a summary")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--outdir", default="results")
    sp.add_argument("--tol", type=float)
    return p


# -- output -------------------------------------------------------------------------

def atomic_write(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None):
    if output:
        atomic_write(output, text)
    else:
        sys.stdout.write(text)


def _table_text(table: suite.Table, fmt: str) -> str:
    if fmt == "csv":
        return table.to_csv()
    rows = [dict(zip(table.columns, [_jsonable(v) for v in r])) for r in table.rows]
    return json.dumps({"table": table.name, "ok": table.ok, "rows": rows}, indent=1) + "\n"


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _records_text(records: Sequence[rates.RateRecord], fmt: str) -> str:
    if fmt == "csv":
        return rates.records_to_csv(records)
    rows = [{k: _jsonable(v) for k, v in r.items()} for r in rates.records_to_json(records)]
    return json.dumps(rows, indent=1) + "\n"


# -- subcommands ----------------------------------------------------------------------

def _phis(names: list[str] | None, default=("yosida", "dunford-segal", "euler")) -> list[BernsteinFunction]:
    return [by_name(n) for n in (names or default)]


def _finish(records, cfg: RunConfig, A=None) -> int:
    _emit(_records_text(records, cfg.out), cfg.output)
    bad = rates.violations(records, cfg.tol)
    if bad:
        witness_dir = os.environ.get("SEMIRATE_WITNESS_DIR", "witnesses")
        try:
            rates.enforce(records, A, witness_dir=witness_dir, tol=cfg.tol)
        except BoundViolation as exc:
            log.error("%s (witness: %s)", exc, exc.witness_path)
        return EXIT_VIOLATION
    return EXIT_OK


def _fail_fast_check(records, cfg: RunConfig, A=None):
    if cfg.fail_fast:
        rates.enforce(records, A, witness_dir=os.environ.get("SEMIRATE_WITNESS_DIR", "witnesses"), tol=cfg.tol)


def cmd_constants(cfg: RunConfig) -> int:
    t = suite.constants_table(cfg.betas)
    _emit(_table_text(t, cfg.out), cfg.output)
    return EXIT_OK if t.ok else EXIT_VIOLATION


def cmd_norms(cfg: RunConfig) -> int:
    if any(not 0 <= a <= 2 for a in cfg.alphas):
        raise ConfigError("alpha must lie in [0, 2]")
    t = suite.fractional_norms_table(cfg.t_grid, cfg.alphas, _phis(cfg.phi))
    _emit(_table_text(t, cfg.out), cfg.output)
    return EXIT_OK if t.ok else EXIT_VIOLATION


def _scheme_phi(cfg: RunConfig) -> BernsteinFunction:
    if cfg.scheme == "custom":
        if not cfg.phi_file:
            raise ConfigError("--scheme custom requires --phi-file")
        return BernsteinFunction.custom(LevyTriple.from_json(Path(cfg.phi_file)), name="custom")
    if cfg.phi_file:
        raise ConfigError("--phi-file is only valid with --scheme custom")
    return by_name(cfg.scheme)


def cmd_rates(cfg: RunConfig) -> int:
    if any(not 0 < a <= 2 for a in cfg.alphas):
        raise ConfigError("alpha must lie in (0, 2]")
    phi = _scheme_phi(cfg)
    A = resolve_matrix(cfg.matrix)
    bounds = rates.certify_bounds(A)
    classical = {"yosida": ["yosida", "yosida-e"], "dunford-segal": ["dunford-segal"], "euler": ["euler"]}
    records = []
    for a in cfg.alphas:
        recs = rates.check_general_upper(phi, A, a, cfg.t_grid, cfg.n_grid, bounds=bounds)
        if cfg.scheme in classical:
            recs += rates.check_classical(A, a, cfg.t_grid, cfg.n_grid, bounds=bounds,
                                          schemes=classical[cfg.scheme])
        _fail_fast_check(recs, cfg, A)
        records += recs
    return _finish(records, cfg, A)


def cmd_analytic(cfg: RunConfig) -> int:
    if any(not 0 <= a <= 1 for a in cfg.alphas):
        raise ConfigError("alpha must lie in [0, 1]")
    A = resolve_matrix(cfg.matrix)
    bounds = rates.certify_bounds(A)
    records = []
    for phi in _phis(cfg.phi):
        rep = rates.check_analytic(phi, A, cfg.alphas, cfg.t_grid, cfg.n_grid, bounds=bounds)
        for a, fit in sorted(rep.fits.items()):
            log.info("%s alpha=%g slope=%.4f r2=%.5f", phi.name, a, fit.slope, fit.r2)
        _fail_fast_check(rep.records, cfg, A)
        records += rep.records
    return _finish(records, cfg, A)


def cmd_lower(cfg: RunConfig, spectra: list[str]) -> int:
    if any(not 0 <= a <= 2 for a in cfg.alphas):
        raise ConfigError("alpha must lie in [0, 2]")
    records = []
    for phi in _phis(cfg.phi):
        for kind in spectra:
            rep = rates.check_lower_bounds(phi, kind, cfg.alphas, n_grid=cfg.n_grid)
            log.info("%s %s c=%.6g T=%.6g", phi.name, kind, rep.constants.c, rep.constants.T)
            _fail_fast_check(rep.records, cfg)
            records += rep.records
    return _finish(records, cfg)


def cmd_appendix(cfg: RunConfig) -> int:
    t = suite.appendix_table()
    _emit(_table_text(t, cfg.out), cfg.output)
    return EXIT_OK if t.ok else EXIT_VIOLATION


def cmd_reproduce(seed: int, outdir: str) -> int:
    tables = suite.all_tables(seed)
    for t in tables:
        atomic_write(Path(outdir) / f"{t.name}.csv", t.to_csv())
    atomic_write(Path(outdir) / "summary.md", suite.summary_markdown(tables, seed))
    for t in tables:
        log.info("%-28s %s", t.name, "PASS" if t.ok else "FAIL")
    return EXIT_OK if all(t.ok for t in tables) else EXIT_VIOLATION


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"semirate: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.subcommand == "reproduce":
            if args.tol is not None:
                if not args.tol > 0:
                    raise ConfigError("--tol must be positive")
                os.environ["SEMIRATE_TOL"] = repr(args.tol)
            return cmd_reproduce(args.seed, args.outdir)
        cfg = RunConfig(
            subcommand=args.subcommand,
            scheme=getattr(args, "scheme", None),
            phi=getattr(args, "phi", None) or [],
            phi_file=getattr(args, "phi_file", None),
            matrix=getattr(args, "matrix", None),
            alphas=getattr(args, "alphas", []),
            t_grid=getattr(args, "t_grid", []),
            n_grid=getattr(args, "n_grid", []),
            betas=getattr(args, "betas", []),
            out=getattr(args, "out", "csv"),
            output=args.output,
            fail_fast=getattr(args, "fail_fast", False),
            tol=args.tol,
        )
        cfg.validate()
        if cfg.tol is not None:
            os.environ["SEMIRATE_TOL"] = repr(cfg.tol)
        dispatch = {
            "constants": cmd_constants,
            "norms": cmd_norms,
            "rates": cmd_rates,
            "analytic": cmd_analytic,
            "appendix": cmd_appendix,
        }
        if cfg.subcommand == "lower-bounds":
            return cmd_lower(cfg, args.spectrum or ["imag-axis", "pos-reals"])
        return dispatch[cfg.subcommand](cfg)
    except BoundViolation as exc:
        print(f"semirate: bound violated: {exc}; witness: {exc.witness_path}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ConfigError, UnsupportedKind, FileNotFoundError, ValueError) as exc:
        print(f"semirate: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SemirateError, FloatingPointError) as exc:
        print(f"semirate: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
