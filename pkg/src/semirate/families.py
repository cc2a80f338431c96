"""Named generator families and matrix-file ingestion.

Family specs follow a small grammar, ``name(arg, arg)``:

* ``diag-imag(k, s_max)``      eigenvalues ``i s_j`` with ``s_j = s_max j / k``
* ``diag-pos(k, s_max)``       eigenvalues ``s_j``
* ``analytic-sector(k, angle)`` eigenvalues ``r_j e^{+-i angle}`` with log-spaced moduli
* ``random-normal(k, seed)``   ``U diag(lam) U^*`` with random unitary ``U`` and
  eigenvalues in a sector of half-angle ``pi/3``
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

from .errors import ConfigError
from .opcalc import Generator

_SPEC = re.compile(r"^\s*([a-z\-]+)\s*\(\s*([^)]*)\)\s*$")


def diag_imag(k: int, s_max: float) -> Generator:
    s = s_max * np.arange(1, k + 1) / k
    return Generator.diagonal(1j * s)


def diag_pos(k: int, s_max: float) -> Generator:
    return Generator.diagonal(s_max * np.arange(1, k + 1) / k)


def analytic_sector(k: int, angle: float, r_min: float = 1e-2, r_max: float = 10.0) -> Generator:
    if not 0 <= angle < np.pi / 2:
        raise ConfigError("sector angle must lie in [0, pi/2)")
    r = np.geomspace(r_min, r_max, k)
    signs = np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
    return Generator.diagonal(r * np.exp(1j * angle * signs))


def random_normal(k: int, seed: int, angle: float = np.pi / 3) -> Generator:
    rng = np.random.default_rng(seed)
    r = np.geomspace(1e-2, 10.0, k) * rng.uniform(0.5, 1.5, k)
    theta = rng.uniform(-angle, angle, k)
    U = unitary_group.rvs(k, random_state=rng) if k > 1 else np.eye(1)
    lam = r * np.exp(1j * theta)
    M = (U * lam[None, :]) @ U.conj().T
    return Generator(M)


_FAMILIES = {
    "diag-imag": (diag_imag, (int, float)),
    "diag-pos": (diag_pos, (int, float)),
    "analytic-sector": (analytic_sector, (int, float)),
    "random-normal": (random_normal, (int, int)),
}


def parse_family(spec: str) -> Generator:
    m = _SPEC.match(spec)
    if not m:
        raise ConfigError(f"cannot parse matrix family {spec!r}")
    name, args = m.group(1), [a.strip() for a in m.group(2).split(",") if a.strip()]
    if name not in _FAMILIES:
        raise ConfigError(f"unknown family {name!r}; choose from {sorted(_FAMILIES)}")
    fn, types = _FAMILIES[name]
    if len(args) != len(types):
        raise ConfigError(f"{name} takes {len(types)} arguments, got {len(args)}")
    try:
        vals = [ty(float(a)) if ty is int else ty(a) for ty, a in zip(types, args)]
    except ValueError as exc:
        raise ConfigError(f"{name}: bad argument ({exc})") from exc
    if vals[0] < 1:
        raise ConfigError(f"{name}: size must be positive")
    return fn(*vals)


def load_matrix(doc) -> Generator:
    """Read ``{"n": int, "entries": [[re, im], ...]}`` (row-major)."""
    if isinstance(doc, (str, Path)) and Path(str(doc)).exists():
        doc = Path(doc).read_text()
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"matrix JSON, line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        n = int(doc["n"])
        entries = np.asarray(doc["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"matrix JSON: {exc}") from exc
    if entries.shape != (n * n, 2):
        raise ConfigError(f"matrix JSON: expected {n * n} [re, im] pairs, got shape {entries.shape}")
    return Generator((entries[:, 0] + 1j * entries[:, 1]).reshape(n, n))


def dump_matrix(A: Generator) -> dict:
    flat = A.matrix.ravel()
    return {"n": A.n, "entries": [[float(z.real), float(z.imag)] for z in flat]}


def resolve_matrix(source: str) -> Generator:
    """Family spec or path to a matrix JSON file."""
    if _SPEC.match(source):
        return parse_family(source)
    if Path(source).exists():
        return load_matrix(Path(source))
    raise ConfigError(f"matrix source {source!r} is neither a family spec nor a file")
