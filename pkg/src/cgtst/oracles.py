"""Independent numerical checks used by the verification suite.

None of these routines reuse the closed forms they are meant to check:
derivatives come from finite differences, partition functions from
quasi-Monte Carlo sampling over the dividing hyperplane, and the coarse free energy from
two-dimensional adaptive quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats
from scipy.linalg import null_space
from scipy.stats import qmc


def fd_gradient(f, x, h=1e-6):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def fd_hessian(grad, x, h=1e-4):
    """Central-difference Jacobian of a gradient, symmetrised."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        H[:, i] = (grad(xp) - grad(xm)) / (2.0 * h)
    return 0.5 * (H + H.T)


def _hyperplane_form(part, v_cg):
    """Quadratic form of ``D_at`` in coordinates (hyperplane basis, constrained)."""
    W = null_space(np.atleast_2d(v_cg))
    top = np.hstack([W.T @ part.R @ W, W.T @ part.B])
    bottom = np.hstack([part.B.T @ W, part.C])
    return np.vstack([top, bottom])


def mc_log_z_saddle_coarse(part, v_cg, V_s, beta, n_points=2**18, n_replicates=8, seed=0):
    """Randomised quasi-Monte Carlo estimate of ``log Z^{cg,#}``.

    Integrates ``exp(-beta V_s - beta/2 u . D_at u)`` over repatom
    displacements orthogonal to ``v_cg`` and over all constrained
    displacements.  Points are scrambled Sobol draws pushed through a
    diagonal Gaussian proposal whose precision is scaled below the
    integrand's, so the importance weights have finite variance.  The error
    estimate comes from the spread over independent scramblings.

    Returns
    -------
    (float, float)
        Log estimate and relative standard error of the estimate.
    """
    Q = _hyperplane_form(part, v_cg)
    dim = Q.shape[0]
    d = np.diag(Q)
    if np.any(d <= 0):
        raise ValueError("integrand is not normalisable on the hyperplane")
    scaled_min = np.linalg.eigvalsh(Q / np.sqrt(np.outer(d, d)))[0]
    if not scaled_min > 0:
        raise ValueError("integrand is not normalisable on the hyperplane")
    prec = beta * min(1.0, scaled_min) * d
    sd = 1.0 / np.sqrt(prec)
    log_norm_prop = 0.5 * float(np.sum(np.log(2.0 * math.pi / prec)))

    means = np.empty(n_replicates)
    for k in range(n_replicates):
        sobol = qmc.Sobol(dim, scramble=True, seed=np.random.default_rng([seed, k]))
        z = stats.norm.ppf(sobol.random(n_points))
        y = z * sd
        quad = np.einsum("ij,jk,ik->i", y, Q, y)
        means[k] = np.mean(np.exp(-0.5 * beta * quad + 0.5 * (y * y) @ prec))
    mean = means.mean()
    rel_se = means.std(ddof=1) / math.sqrt(n_replicates) / mean
    return -beta * V_s + log_norm_prop + math.log(mean), rel_se


def quad_coarse_free_energy(part, u_r, V_s, beta, width=None):
    """Coarse free energy at ``u_r`` by integrating out two constrained atoms.

    Uses nested adaptive quadrature on a box around the origin wide enough
    to hold the Gaussian mass.
    """
    if part.n_constrained != 2:
        raise ValueError("quadrature oracle needs exactly two constrained coordinates")
    u_r = np.asarray(u_r, dtype=float)
    R, B, C = part.R, part.B, part.C
    base = float(u_r @ R @ u_r)
    lin = 2.0 * (B.T @ u_r)
    if width is None:
        c_min = np.linalg.eigvalsh(C)[0]
        width = 12.0 / math.sqrt(beta * c_min) + 4.0 * float(np.max(np.abs(u_r))) * float(
            np.max(np.abs(B))
        ) / c_min

    def integrand(b, a):
        uc = np.array([a, b])
        return math.exp(-0.5 * beta * (base + lin @ uc + uc @ C @ uc))

    val, _ = integrate.dblquad(integrand, -width, width, -width, width, epsabs=0.0, epsrel=1e-11)
    return V_s - math.log(val) / beta
