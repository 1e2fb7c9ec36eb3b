"""Harmonic TST partition functions, rates and the coarse-graining rate error.

Everything that involves products of eigenvalues or powers of ``2 pi / beta``
is kept in log domain; for a 200-dimensional saddle those quantities are far
outside double range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coarse import relaxed_response, schur_complement
from .errors import DegenerateOverlapError, RateOverflowError, SpectrumError

__all__ = [
    "RateParams",
    "ModePair",
    "ErrorBreakdown",
    "LogPartition",
    "unstable_mode",
    "mode_pair",
    "relative_rate_error",
    "error_decomposition",
    "log_z_saddle_atomistic",
    "log_z_saddle_coarse",
    "log_z_basin",
    "log_partition",
    "coarse_saddle_free_energy",
    "coarse_kinetic_constant",
    "htst_rate",
    "log_htst_rate",
]

OVERLAP_FLOOR = 1e-12
# sqrt(lambda_cg / lambda_at) below 1 by no more than this is a roundoff tie
RATIO_ROUNDOFF = 1e-12


@dataclass(frozen=True)
class RateParams:
    beta: float = 1.0
    dimension_d: int = 1

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.dimension_d < 1:
            raise ValueError("dimension_d must be >= 1")

    @property
    def log_thermal(self):
        """``log(2 pi / beta)``."""
        return math.log(2.0 * math.pi / self.beta)


def _norm_inf(M):
    return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0


def _signature(eigenvalues, scale):
    thresh = 1e-10 * scale
    neg = eigenvalues < -thresh
    return int(np.sum(neg)), int(np.sum(np.abs(eigenvalues) <= thresh))


def unstable_mode(M):
    """The unique negative eigenpair of a symmetric matrix.

    Returns
    -------
    (float, ndarray)
        Eigenvalue and unit eigenvector.

    Raises
    ------
    SpectrumError
        ``"no transition pathway"`` when there is no negative eigenvalue,
        ``"not a first-order saddle"`` when there are two or more.
    """
    M = np.asarray(M, dtype=float)
    w, V = np.linalg.eigh(M)
    n_neg, _ = _signature(w, _norm_inf(M))
    if n_neg == 0:
        raise SpectrumError("no transition pathway: no negative eigenvalue")
    if n_neg > 1:
        raise SpectrumError(f"not a first-order saddle: {n_neg} negative eigenvalues")
    return float(w[0]), V[:, 0] / np.linalg.norm(V[:, 0])


@dataclass(frozen=True, eq=False)
class ModePair:
    """Atomistic and coarse unstable modes with ``u_at^r . v_cg > 0``."""

    lambda_at: float
    u_at: np.ndarray
    lambda_cg: float
    v_cg: np.ndarray


def mode_pair(part, lambda_at, u_at, lambda_cg, v_cg):
    """Fix the sign of ``v_cg`` so that it points along ``u_at^r``."""
    u_r, _ = part.split(u_at)
    dot = float(u_r @ v_cg)
    if dot == 0.0:
        raise DegenerateOverlapError("u_at^r is orthogonal to v_cg")
    if dot < 0:
        v_cg = -v_cg
    return ModePair(float(lambda_at), np.asarray(u_at), float(lambda_cg), np.asarray(v_cg))


def relative_rate_error(lambda_at, lambda_cg):
    """``sqrt(lambda_cg / lambda_at) - 1``, the coarse rate's relative excess.

    The ratio is at least one in exact arithmetic; a deficit within
    ``RATIO_ROUNDOFF`` is treated as a tie and reported as zero.
    """
    if not (lambda_at < 0 and lambda_cg < 0):
        raise ValueError("both eigenvalues must be strictly negative")
    err = math.expm1(0.5 * math.log(lambda_cg / lambda_at))
    if err < 0:
        if err < -RATIO_ROUNDOFF:
            raise ValueError(
                f"|lambda_cg| < |lambda_at| beyond roundoff ({lambda_cg!r} vs {lambda_at!r})"
            )
        return 0.0
    return err


@dataclass(frozen=True)
class ErrorBreakdown:
    overlap: float
    longrange: float
    eigen_gap: float
    identity_residual: float
    rel_rate_error: float


def error_decomposition(part, u_at, v_cg, lambda_at, lambda_cg):
    """Split the eigenvalue shift into overlap and long-range terms.

    With ``u_min^c = -C^{-1} B^T u_at^r``::

        (lambda_cg - lambda_at) * (v_cg . u_at^r) = v_cg . B (u_min^c - u_at^c)

    ``v_cg`` is flipped if needed so that the overlap is non-negative.
    """
    u_r, u_c = part.split(u_at)
    overlap = float(v_cg @ u_r)
    if overlap < 0:
        v_cg = -v_cg
        overlap = -overlap
    if overlap <= OVERLAP_FLOOR:
        raise DegenerateOverlapError(f"overlap {overlap:.3e} is numerically zero")
    if part.n_constrained:
        u_min = relaxed_response(part, u_r)
        longrange = float(v_cg @ (part.B @ (u_min - u_c)))
    else:
        longrange = 0.0
    gap = float(lambda_cg - lambda_at)
    return ErrorBreakdown(
        overlap=overlap,
        longrange=longrange,
        eigen_gap=gap,
        identity_residual=abs(gap - longrange / overlap),
        rel_rate_error=relative_rate_error(lambda_at, lambda_cg),
    )


# ---------------------------------------------------------------------------
# partition functions
# ---------------------------------------------------------------------------


def _saddle_log_z(V_s, eigenvalues, log_det_C, n_total, params):
    w = np.asarray(eigenvalues, dtype=float)
    n_neg, n_zero = _signature(w, float(np.max(np.abs(w))))
    if n_neg != 1 or n_zero:
        raise SpectrumError(
            f"saddle spectrum needs exactly one negative and no zero eigenvalue "
            f"(got {n_neg} negative, {n_zero} zero)"
        )
    lam = float(np.min(w))
    log_abs_det = float(np.sum(np.log(np.abs(w))))
    return (
        -params.beta * V_s
        + 0.5 * (n_total - 1) * params.log_thermal
        + 0.5 * (math.log(abs(lam)) - log_det_C - log_abs_det)
    )


def log_z_saddle_atomistic(V_s, eigenvalues, params=RateParams()):
    """``log Z^#``: Gaussian integral over the dividing hyperplane at the saddle."""
    w = np.asarray(eigenvalues, dtype=float)
    return _saddle_log_z(V_s, w, 0.0, w.size, params)


def log_z_saddle_coarse(V_s, eigenvalues, log_det_C, n_constrained, params=RateParams()):
    """``log Z^{cg,#}`` from the spectrum of ``D_cg`` and ``log det C``.

    ``n_constrained`` is the dimension of ``C``; the prefactor exponent
    counts all ``dim D_cg + dim C`` degrees of freedom.
    """
    w = np.asarray(eigenvalues, dtype=float)
    return _saddle_log_z(V_s, w, float(log_det_C), w.size + int(n_constrained), params)


def log_z_basin(V_m, eigenvalues, params=RateParams()):
    """Harmonic basin partition function at a minimum (full space)."""
    w = np.asarray(eigenvalues, dtype=float)
    if np.any(w <= 0):
        raise SpectrumError("basin Hessian must be positive definite")
    return -params.beta * V_m + 0.5 * w.size * params.log_thermal - 0.5 * float(np.sum(np.log(w)))


@dataclass(frozen=True)
class LogPartition:
    log_z_saddle_at: float
    log_z_saddle_cg: float
    log_z_basin_at: float
    beta_used: RateParams


def log_partition(V_s, eig_at, coarse, eig_cg, V_m, eig_min, params=RateParams()):
    """All three log partition values for one mesh."""
    return LogPartition(
        log_z_saddle_at=log_z_saddle_atomistic(V_s, eig_at, params),
        log_z_saddle_cg=log_z_saddle_coarse(
            V_s, eig_cg, coarse.log_det_C, coarse.source.n_constrained, params
        ),
        log_z_basin_at=log_z_basin(V_m, eig_min, params),
        beta_used=params,
    )


def coarse_saddle_free_energy(u_r, part, V_s, params=RateParams()):
    """Coarse potential near the saddle after integrating out constrained atoms.

    ``V_s + (1/2 beta) (log det C - N_c log(2 pi / beta)) + u_r . D_cg u_r / 2``
    """
    coarse = schur_complement(part)
    u_r = np.asarray(u_r, dtype=float)
    n_c = part.n_constrained
    entropic = (coarse.log_det_C - n_c * params.log_thermal) / (2.0 * params.beta)
    return float(V_s + entropic + 0.5 * u_r @ (coarse.D_cg @ u_r))


def coarse_kinetic_constant(params, n_constrained):
    """Additive constant of the coarse kinetic energy, ``-(d N_c / 2 beta) log(2 pi / beta)``."""
    return -(params.dimension_d * n_constrained / (2.0 * params.beta)) * params.log_thermal


def log_htst_rate(log_z_saddle, log_z_basin, params=RateParams()):
    """``log`` of ``(1/2) sqrt(2 / (pi beta)) Z^# / Z``."""
    if not (math.isfinite(log_z_saddle) and math.isfinite(log_z_basin)):
        raise ValueError("log partition values must be finite")
    return math.log(0.5) + 0.5 * math.log(2.0 / (math.pi * params.beta)) + log_z_saddle - log_z_basin


def htst_rate(log_z_saddle, log_z_basin, params=RateParams()):
    """HTST rate; raises :class:`RateOverflowError` (carrying the log rate) on overflow."""
    lr = log_htst_rate(log_z_saddle, log_z_basin, params)
    try:
        return math.exp(lr)
    except OverflowError:
        raise RateOverflowError(lr) from None
