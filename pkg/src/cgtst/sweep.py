"""Mesh sweeps over strains, schemes and core sizes, with CSV output."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .chain import ChainSystem, hessian
from .coarse import SCHEMES, mesh, partition_hessian, schur_complement
from .errors import (
    ChainDomainError,
    ConvergenceError,
    DegenerateOverlapError,
    RepatomRegionError,
    SaddleSearchError,
    SpectrumError,
)
from .rates import (
    error_decomposition,
    mode_pair,
    unstable_mode,
)
from .stationary import find_saddle_analytic, find_saddle_drag

logger = logging.getLogger(__name__)

__all__ = [
    "SweepConfig",
    "SweepRow",
    "SaddleContext",
    "MeshResult",
    "CSV_HEADER",
    "prepare_saddle",
    "analyze_mesh",
    "run_sweep",
    "emit_csv",
    "write_rows",
    "read_csv",
    "load_config_file",
]

CSV_HEADER = (
    "scheme",
    "strain",
    "core_size",
    "n_repatoms",
    "lambda_at",
    "lambda_cg",
    "rel_rate_error",
    "overlap_term",
    "longrange_term",
    "identity_residual",
)
SADDLE_AGREEMENT = 1e-8
SADDLE_METHODS = ("drag", "analytic", "both")

_RECOVERABLE = (
    ChainDomainError,
    ConvergenceError,
    DegenerateOverlapError,
    RepatomRegionError,
    SaddleSearchError,
    SpectrumError,
)


@dataclass(frozen=True)
class SweepConfig:
    n_atoms: int = 202
    strains: tuple = (1.02, 1.035)
    schemes: tuple = ("localized", "delocalized")
    core_sizes: tuple | None = None
    beta: float = 1.0
    saddle_method: str = "both"
    output_path: str | None = None
    verify: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strains", tuple(float(s) for s in self.strains))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        n_free = self.n_atoms - 2
        if self.n_atoms < 4 or self.n_atoms % 2:
            raise ValueError(f"n_atoms must be even and >= 4, got {self.n_atoms}")
        if self.core_sizes is None:
            object.__setattr__(self, "core_sizes", tuple(range(2, n_free + 1, 2)))
        else:
            object.__setattr__(self, "core_sizes", tuple(int(c) for c in self.core_sizes))
        for c in self.core_sizes:
            if c % 2 or not 2 <= c <= n_free:
                raise ValueError(f"core size {c} must be even and within [2, {n_free}]")
        for s in self.strains:
            if not s > 1:
                raise ValueError(f"strain must exceed 1, got {s}")
        for sch in self.schemes:
            if sch not in SCHEMES:
                raise ValueError(f"unknown scheme {sch!r}")
        if self.saddle_method not in SADDLE_METHODS:
            raise ValueError(f"saddle_method must be one of {SADDLE_METHODS}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    strain: float
    core_size: int
    n_repatoms: int
    lambda_at: float
    lambda_cg: float
    rel_rate_error: float
    overlap_term: float
    longrange_term: float
    identity_residual: float
    error: str = field(default="", compare=False)

    @property
    def ok(self):
        return not self.error


@dataclass(frozen=True, eq=False)
class SaddleContext:
    """Everything about one strain that all meshes share."""

    system: ChainSystem
    saddle_config: np.ndarray
    saddle_energy: float
    D_at: np.ndarray
    eigenvalues: np.ndarray
    lambda_at: float
    u_at: np.ndarray
    drag_analytic_gap: float = math.nan


def prepare_saddle(n_atoms, strain, method="both"):
    """Locate the saddle for one strain and diagonalise its Hessian."""
    system = ChainSystem.stretched(strain, n_atoms)
    gap = math.nan
    if method == "drag":
        point = find_saddle_drag(system)
    elif method == "analytic":
        point = find_saddle_analytic(system)
    else:
        point = find_saddle_drag(system)
        other = find_saddle_analytic(system)
        gap = float(np.max(np.abs(point.config - other.config)))
        if not gap < SADDLE_AGREEMENT:
            raise SaddleSearchError(
                f"drag and analytic saddles disagree by {gap:.3e} at strain {strain}"
            )
    D_at = hessian(system, point.config)
    w = np.linalg.eigvalsh(D_at)
    lam, u = unstable_mode(D_at)
    return SaddleContext(
        system=system,
        saddle_config=point.config,
        saddle_energy=point.energy,
        D_at=D_at,
        eigenvalues=w,
        lambda_at=lam,
        u_at=u,
        drag_analytic_gap=gap,
    )


@dataclass(frozen=True, eq=False)
class MeshResult:
    repatoms: object
    part: object
    coarse: object
    eigenvalues_cg: np.ndarray
    lambda_cg: float
    v_cg: np.ndarray
    breakdown: object


def analyze_mesh(ctx, repatoms):
    """Coarse-grain the saddle Hessian of ``ctx`` to ``repatoms``."""
    part = partition_hessian(ctx.D_at, repatoms)
    coarse = schur_complement(part)
    w, V = np.linalg.eigh(coarse.D_cg)
    lam_cg, v = unstable_mode(coarse.D_cg)
    pair = mode_pair(part, ctx.lambda_at, ctx.u_at, lam_cg, v)
    bd = error_decomposition(part, pair.u_at, pair.v_cg, pair.lambda_at, pair.lambda_cg)
    return MeshResult(repatoms, part, coarse, w, lam_cg, pair.v_cg, bd)


def _row(scheme, strain, core, ctx, res):
    bd = res.breakdown
    return SweepRow(
        scheme=scheme,
        strain=strain,
        core_size=core,
        n_repatoms=len(res.repatoms),
        lambda_at=ctx.lambda_at,
        lambda_cg=res.lambda_cg,
        rel_rate_error=bd.rel_rate_error,
        overlap_term=bd.overlap,
        longrange_term=bd.longrange,
        identity_residual=bd.identity_residual,
    )


def _error_row(scheme, strain, core, n_rep, lambda_at, message):
    nan = math.nan
    return SweepRow(scheme, strain, core, n_rep, lambda_at, nan, nan, nan, nan, nan, error=message)


def iter_meshes(config, contexts):
    """``(scheme, strain, core, ctx, result_or_exception)`` in output order."""
    for scheme in sorted(config.schemes):
        for strain in sorted(config.strains):
            ctx = contexts[strain]
            for core in sorted(config.core_sizes):
                reps = mesh(scheme, config.n_atoms, core)
                if isinstance(ctx, Exception):
                    yield scheme, strain, core, reps, ctx, ctx
                    continue
                try:
                    res = analyze_mesh(ctx, reps)
                except _RECOVERABLE as exc:
                    res = exc
                yield scheme, strain, core, reps, ctx, res


def prepare_contexts(config):
    contexts = {}
    for strain in config.strains:
        try:
            contexts[strain] = prepare_saddle(config.n_atoms, strain, config.saddle_method)
        except _RECOVERABLE as exc:
            logger.error("saddle search failed at strain %s: %s", strain, exc)
            contexts[strain] = exc
    return contexts


def run_sweep(config, contexts=None):
    """One row per (scheme, strain, core size), sorted in that order.

    Failures (saddle search, non-positive-definite ``C``, ...) produce a row
    whose ``error`` field is set and whose numeric fields are NaN; the sweep
    carries on.
    """
    if contexts is None:
        contexts = prepare_contexts(config)
    rows = []
    for scheme, strain, core, reps, ctx, res in iter_meshes(config, contexts):
        if isinstance(res, Exception):
            lam = ctx.lambda_at if isinstance(ctx, SaddleContext) else math.nan
            rows.append(_error_row(scheme, strain, core, len(reps), lam, f"{type(res).__name__}: {res}"))
        else:
            rows.append(_row(scheme, strain, core, ctx, res))
    n_ok = sum(r.ok for r in rows)
    logger.info("sweep finished: %d of %d rows succeeded", n_ok, len(rows))
    return rows


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def emit_csv(rows, path):
    """Write rows with a fixed header; floats carry 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        write_rows(rows, fh)


def write_rows(rows, fh):
    """Write the header and rows to an open text stream."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in CSV_HEADER])


def read_csv(path):
    """Parse a file written by :func:`emit_csv` back into rows."""
    types = {f.name: f.type for f in fields(SweepRow)}
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for rec in reader:
            kw = {}
            for name, text in zip(CSV_HEADER, rec):
                t = types[name]
                kw[name] = text if t == "str" else int(text) if t == "int" else float(text)
            rows.append(SweepRow(**kw))
    return rows


# ---------------------------------------------------------------------------
# key = value config files
# ---------------------------------------------------------------------------

_LIST_KEYS = {"strain": "strains", "strains": "strains", "scheme": "schemes", "schemes": "schemes"}


def load_config_file(path):
    """Read ``key = value`` lines into keyword arguments for :class:`SweepConfig`.

    Recognised keys: ``atoms``, ``strain``/``strains`` and
    ``scheme``/``schemes`` (comma separated), ``core_min``, ``core_max``,
    ``core_step``, ``beta``, ``saddle``, ``out``, ``verify``.  ``#`` starts a
    comment.
    """
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key.replace("-", "_").lower()] = value

    out = {}
    for key, value in raw.items():
        if key in _LIST_KEYS:
            items = [v.strip() for v in value.split(",") if v.strip()]
            out[_LIST_KEYS[key]] = [float(v) for v in items] if _LIST_KEYS[key] == "strains" else items
        elif key == "atoms":
            out["n_atoms"] = int(value)
        elif key in ("core_min", "core_max", "core_step"):
            out[key] = int(value)
        elif key == "beta":
            out["beta"] = float(value)
        elif key == "saddle":
            out["saddle_method"] = value
        elif key == "out":
            out["output_path"] = value
        elif key == "verify":
            out["verify"] = value.lower() in {"1", "true", "yes", "on"}
        else:
            raise ValueError(f"{path}: unknown key {key!r}")
    return out


def core_range(n_atoms, core_min=2, core_max=None, core_step=2):
    n_free = n_atoms - 2
    core_max = n_free if core_max is None else min(core_max, n_free)
    return tuple(range(core_min, core_max + 1, core_step))


def with_overrides(config, **kw):
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
