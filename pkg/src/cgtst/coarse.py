"""Repatom meshes and Schur-complement coarse-graining of a saddle Hessian.

A repatom set splits the free degrees of freedom into representative atoms
(kept) and constrained atoms (integrated out).  Reordering the Hessian as
``[[R, B], [B^T, C]]`` gives the coarse dynamical matrix

    D_cg = R - B C^{-1} B^T

which is formed here with Cholesky solves on ``C``; ``C`` must be positive
definite for the coarse saddle to be meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import RepatomRegionError

__all__ = [
    "RepatomSet",
    "PartitionedHessian",
    "CoarseHessian",
    "localized_indices",
    "delocalized_indices",
    "delocalized_minimal_indices",
    "mesh",
    "SCHEMES",
    "partition_hessian",
    "schur_complement",
    "relaxed_response",
    "embed_min",
]


@dataclass(frozen=True)
class RepatomSet:
    """Strictly increasing free-DOF indices of the repatoms.

    Free index ``j`` is atom ``j + 1`` (atom ``0`` is the pinned left end).
    """

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("repatom set must not be empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("repatom indices must be strictly increasing")
        if idx[0] < 0:
            raise ValueError("repatom indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_atoms(cls, atoms):
        return cls(tuple(sorted(int(a) - 1 for a in set(atoms))))

    @property
    def atoms(self):
        """Atom labels (0-based over the whole chain, endpoints included)."""
        return tuple(i + 1 for i in self.indices)

    def __len__(self):
        return len(self.indices)

    def as_array(self):
        return np.asarray(self.indices, dtype=np.intp)


def _check_core(n_atoms, core_size):
    if n_atoms < 4 or n_atoms % 2:
        raise ValueError(f"n_atoms must be even and >= 4, got {n_atoms}")
    n_free = n_atoms - 2
    if core_size % 2 or not 2 <= core_size <= n_free:
        raise ValueError(f"core size must be even with 2 <= N <= {n_free}, got {core_size}")


def _core_atoms(n_atoms, core_size):
    c = n_atoms // 2 - 1
    half = core_size // 2
    return [c - l for l in range(half)] + [c + 1 + l for l in range(half)]


def localized_indices(n_atoms, core_size):
    """Contiguous block of ``core_size`` repatoms centred on the weak bond."""
    _check_core(n_atoms, core_size)
    return RepatomSet.from_atoms(_core_atoms(n_atoms, core_size))


def delocalized_indices(n_atoms, core_size):
    """Localized core plus peripheral repatoms with geometrically growing gaps.

    Moving outwards from the core the number of constrained atoms between
    consecutive repatoms is 1, 2, 4, 8, ... until the chain end is reached.
    The set is symmetric about the central bond.
    """
    _check_core(n_atoms, core_size)
    c = n_atoms // 2 - 1
    half = core_size // 2
    atoms = _core_atoms(n_atoms, core_size)
    l = 1
    while (a := c - (half - 1) - 2**l - (l - 1)) > 0:
        atoms.append(a)
        l += 1
    l = 1
    while (a := c + 1 + (half - 1) + 2**l + (l - 1)) < n_atoms - 1:
        atoms.append(a)
        l += 1
    return RepatomSet.from_atoms(atoms)


def delocalized_minimal_indices(n_atoms, core_size):
    """Core plus one peripheral repatom per side, one constrained atom away."""
    _check_core(n_atoms, core_size)
    c = n_atoms // 2 - 1
    half = core_size // 2
    atoms = _core_atoms(n_atoms, core_size)
    left = c - (half - 1) - 2
    right = c + 1 + (half - 1) + 2
    if left > 0:
        atoms.append(left)
    if right < n_atoms - 1:
        atoms.append(right)
    return RepatomSet.from_atoms(atoms)


SCHEMES = {
    "localized": localized_indices,
    "delocalized": delocalized_indices,
    "delocalized-minimal": delocalized_minimal_indices,
}


def mesh(scheme, n_atoms, core_size):
    try:
        builder = SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}") from None
    return builder(n_atoms, core_size)


@dataclass(frozen=True, eq=False)
class PartitionedHessian:
    """Blocks of a symmetric matrix under the ordering (repatoms, constrained)."""

    R: np.ndarray
    B: np.ndarray
    C: np.ndarray
    repatoms: RepatomSet
    constrained: np.ndarray
    permutation: np.ndarray

    @property
    def n_repatoms(self):
        return self.R.shape[0]

    @property
    def n_constrained(self):
        return self.C.shape[0]

    def split(self, u):
        """Repatom and constrained parts of a full-length vector."""
        u = np.asarray(u)
        return u[self.repatoms.as_array()], u[self.constrained]

    def merge(self, u_r, u_c):
        """Inverse of :meth:`split`."""
        out = np.empty(self.n_repatoms + self.n_constrained)
        out[self.repatoms.as_array()] = u_r
        out[self.constrained] = u_c
        return out

    def reassemble(self):
        """Original matrix rebuilt from the blocks."""
        n = self.n_repatoms + self.n_constrained
        P = np.empty((n, n))
        P[: self.n_repatoms, : self.n_repatoms] = self.R
        P[: self.n_repatoms, self.n_repatoms :] = self.B
        P[self.n_repatoms :, : self.n_repatoms] = self.B.T
        P[self.n_repatoms :, self.n_repatoms :] = self.C
        inv = np.argsort(self.permutation)
        return P[np.ix_(inv, inv)]


def partition_hessian(D, repatoms):
    """Split ``D`` into ``R``, ``B``, ``C``.  Pure slicing, no arithmetic."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n):
        raise ValueError("expected a square matrix")
    if not isinstance(repatoms, RepatomSet):
        repatoms = RepatomSet(tuple(repatoms))
    rep = repatoms.as_array()
    if rep[-1] >= n:
        raise IndexError(f"repatom index {rep[-1]} out of range for dimension {n}")
    mask = np.ones(n, dtype=bool)
    mask[rep] = False
    con = np.nonzero(mask)[0]
    return PartitionedHessian(
        R=D[np.ix_(rep, rep)],
        B=D[np.ix_(rep, con)],
        C=D[np.ix_(con, con)],
        repatoms=repatoms,
        constrained=con,
        permutation=np.concatenate([rep, con]),
    )


def _factor_C(part):
    try:
        return sla.cho_factor(part.C, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise RepatomRegionError(
            "constrained block is not positive definite; the repatom region "
            "does not contain the essential transition behaviour"
        ) from None


@dataclass(frozen=True, eq=False)
class CoarseHessian:
    D_cg: np.ndarray
    log_det_C: float
    source: PartitionedHessian


def schur_complement(part):
    """Coarse dynamical matrix ``R - B C^{-1} B^T`` and ``log det C``.

    The result is symmetrised to remove roundoff asymmetry.

    Raises
    ------
    RepatomRegionError
        If ``C`` is not positive definite.
    """
    if part.n_constrained == 0:
        return CoarseHessian(D_cg=part.R.copy(), log_det_C=0.0, source=part)
    fac = _factor_C(part)
    log_det_C = 2.0 * float(np.sum(np.log(np.diag(fac[0]))))
    X = sla.cho_solve(fac, part.B.T, check_finite=False)
    D = part.R - part.B @ X
    return CoarseHessian(D_cg=0.5 * (D + D.T), log_det_C=log_det_C, source=part)


def relaxed_response(part, u_r):
    """Constrained displacements ``-C^{-1} B^T u_r`` minimising the energy at fixed ``u_r``."""
    u_r = np.asarray(u_r, dtype=float)
    if part.n_constrained == 0:
        return np.zeros(0)
    fac = _factor_C(part)
    return -sla.cho_solve(fac, part.B.T @ u_r, check_finite=False)


def embed_min(part, v):
    """Lift a repatom vector to the full space with relaxed constrained atoms.

    The image satisfies ``D v_min = (D_cg v, 0)`` in partitioned order; the
    returned vector is in the original ordering.
    """
    v = np.asarray(v, dtype=float)
    return part.merge(v, relaxed_response(part, v))
