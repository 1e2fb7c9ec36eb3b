"""One-dimensional fracture chain with fixed endpoints.

The chain has ``n_atoms`` atoms at positions ``q_0 < q_1 < ... < q_{n-1}``.
The two endpoints are pinned; the remaining ``n_atoms - 2`` atoms are the
degrees of freedom.  Neighbouring atoms interact through a harmonic spring,
except for the weakened central bond between atoms ``n_atoms/2 - 1`` and
``n_atoms/2``, which is a Lennard-Jones bond.

All public functions take and return *mass-weighted* free coordinates
``x_i = sqrt(m_i) q_i``.  With unit masses (the default) these coincide
with raw positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ChainDomainError

__all__ = [
    "PotentialParams",
    "ChainSystem",
    "central_bond_energy",
    "spring_energy",
    "total_energy",
    "gradient",
    "hessian",
    "hessian_bands",
]


@dataclass(frozen=True)
class PotentialParams:
    """Bond potential parameters (reduced units).

    The defaults put the Lennard-Jones minimum at ``r = 1`` with depth
    ``-epsilon`` and give the springs unit stiffness and rest length.
    """

    epsilon: float = 1.0
    sigma: float = 2.0 ** (-1.0 / 6.0)
    spring_rest: float = 1.0
    spring_k: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.spring_k > 0:
            raise ValueError(f"spring_k must be positive, got {self.spring_k}")

    def as_tuple(self):
        return (
            float(self.epsilon),
            float(self.sigma),
            float(self.spring_rest),
            float(self.spring_k),
        )


def central_bond_energy(r, params=PotentialParams(), order=0):
    """Lennard-Jones bond energy ``4 eps ((sigma/r)^12 - (sigma/r)^6)``.

    ``order`` selects the value (0) or the first (1) or second (2)
    derivative with respect to ``r``.
    """
    r = float(r)
    if not r > 0:
        raise ChainDomainError(f"bond length must be positive, got {r}")
    eps, sig = params.epsilon, params.sigma
    sr6 = (sig / r) ** 6
    sr12 = sr6 * sr6
    if order == 0:
        return 4.0 * eps * (sr12 - sr6)
    if order == 1:
        return 4.0 * eps * (-12.0 * sr12 + 6.0 * sr6) / r
    if order == 2:
        return 4.0 * eps * (156.0 * sr12 - 42.0 * sr6) / (r * r)
    raise ValueError(f"order must be 0, 1 or 2, got {order}")


def spring_energy(r, params=PotentialParams(), order=0):
    """Harmonic spring ``k/2 (r - rest)^2`` and its derivatives."""
    k, rest = params.spring_k, params.spring_rest
    if order == 0:
        return 0.5 * k * (float(r) - rest) ** 2
    if order == 1:
        return k * (float(r) - rest)
    if order == 2:
        return float(k)
    raise ValueError(f"order must be 0, 1 or 2, got {order}")


@dataclass(frozen=True, eq=False)
class ChainSystem:
    """A chain with pinned endpoints.

    Parameters
    ----------
    n_atoms : int
        Total number of atoms, endpoints included.  Must be even and >= 4.
    strain : float
        Stretch factor ``s``.  Informational when the boundaries are given
        explicitly; :meth:`stretched` derives the right boundary from it.
    left_boundary, right_boundary : float
        Pinned positions of atoms ``0`` and ``n_atoms - 1``.
    params : PotentialParams
    masses : array_like, optional
        Per-atom masses (length ``n_atoms``).  Defaults to all ones.
    """

    n_atoms: int
    strain: float
    left_boundary: float
    right_boundary: float
    params: PotentialParams = field(default_factory=PotentialParams)
    masses: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n_atoms)
        if n < 4 or n % 2:
            raise ValueError(f"n_atoms must be even and >= 4, got {self.n_atoms}")
        if not self.left_boundary < self.right_boundary:
            raise ValueError("left_boundary must be smaller than right_boundary")
        if self.masses is None:
            masses = np.ones(n)
        else:
            masses = np.array(self.masses, dtype=float)
            if masses.shape != (n,):
                raise ValueError(f"masses must have length {n}")
            if np.any(masses <= 0):
                raise ValueError("masses must be positive")
        masses.setflags(write=False)
        object.__setattr__(self, "n_atoms", n)
        object.__setattr__(self, "masses", masses)
        sqrt_m = np.sqrt(masses[1:-1])
        sqrt_m.setflags(write=False)
        object.__setattr__(self, "_sqrt_m", sqrt_m)

    @classmethod
    def stretched(cls, strain, n_atoms=202, params=None, masses=None):
        """The standard setup: ``q_0 = 0`` and ``q_{n-1} = (n - 1) s``."""
        return cls(
            n_atoms=n_atoms,
            strain=float(strain),
            left_boundary=0.0,
            right_boundary=(n_atoms - 1) * float(strain),
            params=PotentialParams() if params is None else params,
            masses=masses,
        )

    @property
    def n_free(self):
        return self.n_atoms - 2

    @property
    def center_left(self):
        """Atom index of the left end of the Lennard-Jones bond."""
        return self.n_atoms // 2 - 1

    @property
    def length(self):
        return self.right_boundary - self.left_boundary

    @property
    def sqrt_masses(self):
        """Square roots of the free-atom masses."""
        return self._sqrt_m

    @property
    def unit_masses(self):
        return bool(np.all(self.masses == 1.0))

    # -- coordinate maps ---------------------------------------------------

    def positions(self, x):
        """Full raw position vector (endpoints included) from free ``x``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_free,):
            raise ValueError(f"expected {self.n_free} free coordinates, got {x.shape}")
        q = np.empty(self.n_atoms)
        q[0] = self.left_boundary
        q[-1] = self.right_boundary
        q[1:-1] = x / self._sqrt_m
        return q

    def from_positions(self, q_free):
        """Mass-weight raw free positions."""
        return np.asarray(q_free, dtype=float) * self._sqrt_m

    def uniform_config(self):
        """Equally spaced atoms between the two boundaries."""
        t = np.arange(1, self.n_atoms - 1) / (self.n_atoms - 1)
        return self.from_positions(self.left_boundary + t * self.length)

    def mirror(self, x):
        """Image of ``x`` under ``q_i -> q_0 + q_{n-1} - q_{n-1-i}``."""
        q = self.positions(x)
        qm = self.left_boundary + self.right_boundary - q[::-1]
        return self.from_positions(qm[1:-1])

    def bond_lengths(self, x):
        return np.diff(self.positions(x))

    def _raw(self, x):
        q = self.positions(x)
        if not _kernels.min_bond(q) > 0:
            raise ChainDomainError("non-positive bond length (atoms crossed)")
        return q


def total_energy(system, x):
    """Chain energy: one Lennard-Jones bond plus ``n_atoms - 2`` springs."""
    q = system._raw(x)
    return float(_kernels.energy(q, system.center_left, *system.params.as_tuple()))


def gradient(system, x):
    """Gradient of :func:`total_energy` with respect to mass-weighted ``x``."""
    q = system._raw(x)
    g = _kernels.gradient(q, system.center_left, *system.params.as_tuple())
    return g[1:-1] / system.sqrt_masses


def hessian_bands(system, x):
    """Diagonal and first off-diagonal of the mass-weighted Hessian."""
    q = system._raw(x)
    diag, off = _kernels.hessian_bands(q, system.center_left, *system.params.as_tuple())
    s = system.sqrt_masses
    return diag[1:-1] / (s * s), off[1:-1] / (s[:-1] * s[1:])


def hessian(system, x):
    """Dense mass-weighted Hessian over the free atoms (tridiagonal)."""
    diag, off = hessian_bands(system, x)
    n = diag.size
    H = np.zeros((n, n))
    idx = np.arange(n)
    H[idx, idx] = diag
    H[idx[:-1], idx[1:]] = off
    H[idx[1:], idx[:-1]] = off
    return H
