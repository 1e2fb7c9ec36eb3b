"""
Per-bond kernels for the nearest-neighbour chain.

Every kernel works on the full raw position vector ``q`` (boundary atoms
included) and returns quantities over *all* atoms; callers slice out the
free degrees of freedom.  Bond ``i`` joins atoms ``i`` and ``i + 1``; bond
``center`` is the Lennard-Jones bond, every other bond is a harmonic spring.

Two implementations exist.  The numba versions are plain loops compiled with
``@njit``; the numpy versions are vectorised.  Which one the public names
point to is decided once at import time:

    CGTST_DISABLE_NUMBA=1   force the numpy path

The numpy path is also used automatically when numba is not importable.
"""

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator


def _flag(name):
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = NUMBA_AVAILABLE and not _flag("CGTST_DISABLE_NUMBA")


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _lj_terms(r, eps, sig):
    sr6 = (sig / r) ** 6
    sr12 = sr6 * sr6
    e = 4.0 * eps * (sr12 - sr6)
    d1 = 4.0 * eps * (-12.0 * sr12 + 6.0 * sr6) / r
    d2 = 4.0 * eps * (156.0 * sr12 - 42.0 * sr6) / (r * r)
    return e, d1, d2


@njit(cache=True)
def min_bond_numba(q):
    m = np.inf
    for i in range(q.shape[0] - 1):
        r = q[i + 1] - q[i]
        if r < m:
            m = r
    return m


@njit(cache=True)
def energy_numba(q, center, eps, sig, rest, k):
    total = 0.0
    for i in range(q.shape[0] - 1):
        r = q[i + 1] - q[i]
        if i == center:
            e, _, _ = _lj_terms(r, eps, sig)
            total += e
        else:
            total += 0.5 * k * (r - rest) ** 2
    return total


@njit(cache=True)
def gradient_numba(q, center, eps, sig, rest, k):
    n = q.shape[0]
    g = np.zeros(n)
    for i in range(n - 1):
        r = q[i + 1] - q[i]
        if i == center:
            _, d1, _ = _lj_terms(r, eps, sig)
        else:
            d1 = k * (r - rest)
        g[i] -= d1
        g[i + 1] += d1
    return g


@njit(cache=True)
def hessian_bands_numba(q, center, eps, sig, rest, k):
    n = q.shape[0]
    diag = np.zeros(n)
    off = np.zeros(n - 1)
    for i in range(n - 1):
        if i == center:
            _, _, d2 = _lj_terms(q[i + 1] - q[i], eps, sig)
        else:
            d2 = k
        diag[i] += d2
        diag[i + 1] += d2
        off[i] = -d2
    return diag, off


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------


def _bond_derivs_numpy(q, center, eps, sig, rest, k, order):
    r = np.diff(q)
    rc = r[center]
    sr6 = (sig / rc) ** 6
    sr12 = sr6 * sr6
    if order == 0:
        out = 0.5 * k * (r - rest) ** 2
        out[center] = 4.0 * eps * (sr12 - sr6)
    elif order == 1:
        out = k * (r - rest)
        out[center] = 4.0 * eps * (-12.0 * sr12 + 6.0 * sr6) / rc
    else:
        out = np.full_like(r, float(k))
        out[center] = 4.0 * eps * (156.0 * sr12 - 42.0 * sr6) / (rc * rc)
    return out


def min_bond_numpy(q):
    return float(np.min(np.diff(q)))


def energy_numpy(q, center, eps, sig, rest, k):
    return float(np.sum(_bond_derivs_numpy(q, center, eps, sig, rest, k, 0)))


def gradient_numpy(q, center, eps, sig, rest, k):
    d1 = _bond_derivs_numpy(q, center, eps, sig, rest, k, 1)
    g = np.zeros_like(q)
    g[:-1] -= d1
    g[1:] += d1
    return g


def hessian_bands_numpy(q, center, eps, sig, rest, k):
    d2 = _bond_derivs_numpy(q, center, eps, sig, rest, k, 2)
    diag = np.zeros_like(q)
    diag[:-1] += d2
    diag[1:] += d2
    return diag, -d2


if USE_NUMBA:
    min_bond = min_bond_numba
    energy = energy_numba
    gradient = gradient_numba
    hessian_bands = hessian_bands_numba
else:
    min_bond = min_bond_numpy
    energy = energy_numpy
    gradient = gradient_numpy
    hessian_bands = hessian_bands_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
