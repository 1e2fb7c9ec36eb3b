"""Minima and fracture saddle points of the chain, plus the analytic unstable mode.

Two independent routes to the saddle are provided:

* :func:`find_saddle_drag` stretches the central bond in small increments,
  relaxing every other coordinate at each step, until the relaxed energy
  stops rising; a Newton polish on all coordinates then lands on the saddle.
* :func:`find_saddle_analytic` uses the mirror symmetry of the saddle to
  reduce the problem to one scalar force balance on the left atom of the
  central bond and scans it for roots.

Searches are done in raw positions (stationary points do not depend on the
mass weighting); results are returned in mass-weighted coordinates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy.optimize import brentq

from . import _kernels
from .chain import central_bond_energy, gradient, hessian, total_energy
from .errors import ChainDomainError, ConvergenceError, SaddleSearchError

logger = logging.getLogger(__name__)

__all__ = [
    "StationaryPoint",
    "PolynomialRoot",
    "AnalyticEigenmode",
    "find_minimum",
    "find_saddle_drag",
    "find_saddle_analytic",
    "saddle_polynomial_roots",
    "force_balance",
    "symmetric_config",
    "negative_count",
    "analytic_eigenmode",
    "analytic_unstable_mode",
    "analytic_unstable_eigenvalue",
]

TOL_MIN = 1e-10
TOL_SADDLE = 1e-10
DRAG_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class StationaryPoint:
    config: np.ndarray
    energy: float
    kind: str
    residual: float
    negative_count: int


def negative_count(M):
    """Number of eigenvalues below ``-1e-10 * ||M||_inf``."""
    w = np.linalg.eigvalsh(M)
    thresh = 1e-10 * np.max(np.sum(np.abs(M), axis=1))
    return int(np.sum(w < -thresh))


def _make_point(system, x, kind):
    H = hessian(system, x)
    return StationaryPoint(
        config=x,
        energy=total_energy(system, x),
        kind=kind,
        residual=float(np.max(np.abs(gradient(system, x)))),
        negative_count=negative_count(H),
    )


# ---------------------------------------------------------------------------
# raw-position helpers
# ---------------------------------------------------------------------------


def _full(system, q_free):
    q = np.empty(system.n_atoms)
    q[0] = system.left_boundary
    q[-1] = system.right_boundary
    q[1:-1] = q_free
    return q


def _raw_grad(system, q_free):
    q = _full(system, q_free)
    if not _kernels.min_bond(q) > 0:
        raise ChainDomainError("non-positive bond length (atoms crossed)")
    return _kernels.gradient(q, system.center_left, *system.params.as_tuple())[1:-1]


def _raw_bands(system, q_free):
    q = _full(system, q_free)
    diag, off = _kernels.hessian_bands(q, system.center_left, *system.params.as_tuple())
    return diag[1:-1], off[1:-1]


def _raw_energy(system, q_free):
    q = _full(system, q_free)
    if not _kernels.min_bond(q) > 0:
        return np.inf
    return _kernels.energy(q, system.center_left, *system.params.as_tuple())


def _banded_solve(diag, off, rhs):
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return sla.solve_banded((1, 1), ab, rhs, check_finite=False)


def _newton_polish(system, q, tol, max_iter=60):
    """Plain Newton on the full gradient; converges to the nearby stationary point.

    Iterates past ``tol`` until the step stalls, because positions are only
    as accurate as ``residual / smallest |eigenvalue|``.
    """
    scale = 1.0 + np.max(np.abs(q))
    best_q, best_res = q, np.max(np.abs(_raw_grad(system, q)))
    prev = np.inf
    for _ in range(max_iter):
        g = _raw_grad(system, q)
        diag, off = _raw_bands(system, q)
        step = _banded_solve(diag, off, g)
        q = q - step
        res = np.max(np.abs(_raw_grad(system, q)))
        if res < best_res:
            best_q, best_res = q, res
        if np.max(np.abs(step)) < 1e-15 * scale:
            break
        if res < tol and res >= prev:  # reached the roundoff floor
            break
        prev = res
    return best_q, best_res


# ---------------------------------------------------------------------------
# minimum
# ---------------------------------------------------------------------------


def find_minimum(system, initial=None, tol=TOL_MIN, max_iter=200):
    """Locate a local energy minimum by damped Newton iteration.

    Raises
    ------
    ConvergenceError
        If the gradient max-norm does not drop below ``tol`` within
        ``max_iter`` iterations, or the result is not a minimum.
    """
    x0 = system.uniform_config() if initial is None else np.asarray(initial, dtype=float)
    q = x0 / system.sqrt_masses
    e = _raw_energy(system, q)
    if not np.isfinite(e):
        raise ChainDomainError("initial configuration has non-positive bonds")
    for _ in range(max_iter):
        g = _raw_grad(system, q)
        if np.max(np.abs(g)) < tol:
            break
        diag, off = _raw_bands(system, q)
        try:
            step = -_banded_solve(diag, off, g)
        except (np.linalg.LinAlgError, ValueError):
            step = -g
        if step @ g >= 0:  # not a descent direction, Hessian indefinite here
            step = -g / max(1.0, np.max(np.abs(diag)))
        t = 1.0
        slack = 64 * np.finfo(float).eps * (1.0 + abs(e))  # energy roundoff
        while t > 1e-12:
            e_new = _raw_energy(system, q + t * step)
            if e_new <= e + 1e-4 * t * (step @ g) + slack:
                break
            t *= 0.5
        q = q + t * step
        e = _raw_energy(system, q)
    else:
        raise ConvergenceError(f"minimum search did not converge in {max_iter} iterations")

    q, _ = _newton_polish(system, q, tol)
    point = _make_point(system, system.from_positions(q), "minimum")
    if point.residual >= tol:
        raise ConvergenceError(f"minimum residual {point.residual:.3e} above tolerance")
    if point.negative_count != 0:
        raise ConvergenceError("converged to a stationary point that is not a minimum")
    return point


# ---------------------------------------------------------------------------
# drag-and-relax saddle
# ---------------------------------------------------------------------------


def _relax_fixed_bond(system, q, r, tol=1e-13, max_iter=50):
    """Minimise over all coordinates at fixed central bond length ``r``.

    The two central atoms are replaced by their midpoint, which keeps the
    reduced Hessian tridiagonal.
    """
    jl = system.center_left - 1  # free index of the left central atom
    q = q.copy()
    mid = 0.5 * (q[jl] + q[jl + 1])
    q[jl], q[jl + 1] = mid - 0.5 * r, mid + 0.5 * r
    for _ in range(max_iter):
        g = _raw_grad(system, q)
        diag, off = _raw_bands(system, q)
        # reduced coordinates: (q[:jl], mid, q[jl+2:])
        gr = np.concatenate([g[:jl], [g[jl] + g[jl + 1]], g[jl + 2 :]])
        dr = np.concatenate([diag[:jl], [diag[jl] + diag[jl + 1] + 2.0 * off[jl]], diag[jl + 2 :]])
        orr = np.concatenate([off[:jl], off[jl + 1 :]])
        step = _banded_solve(dr, orr, gr)
        dq = np.concatenate([step[:jl], [step[jl], step[jl]], step[jl + 1 :]])
        q -= dq
        if np.max(np.abs(dq)) < tol * (1.0 + np.max(np.abs(q))):
            break
    else:
        raise ConvergenceError("constrained relaxation diverged")
    return q


def _bond_force(system, q):
    """Derivative of the relaxed energy with respect to the central bond length."""
    jl = system.center_left - 1
    g = _raw_grad(system, q)
    return 0.5 * (g[jl + 1] - g[jl])


def find_saddle_drag(system, step=DRAG_STEP, tol=TOL_SADDLE, max_length=None):
    """Saddle by slowly stretching the central bond with full relaxation.

    Starting from the intact-chain minimum, the central bond is lengthened
    in increments of ``step``.  Once the relaxed energy starts to decrease
    the bracketing interval is bisected and a Newton polish on all
    coordinates finishes the job.
    """
    minimum = find_minimum(system)
    q = minimum.config / system.sqrt_masses
    jl = system.center_left - 1
    r = q[jl + 1] - q[jl]
    # the other n-2 bonds must keep positive length
    if max_length is None:
        max_length = system.length - 1e-6
    q = _relax_fixed_bond(system, q, r)
    f_prev = _bond_force(system, q)
    q_prev, r_prev = q, r
    while True:
        r += step
        if r >= max_length:
            raise SaddleSearchError("no sign change of the central-bond force along the drag path")
        try:
            q = _relax_fixed_bond(system, q_prev, r)
        except ChainDomainError as exc:
            raise SaddleSearchError(f"relaxation failed at bond length {r:.6f}") from exc
        f = _bond_force(system, q)
        if f_prev > 0 and f <= 0:
            break
        f_prev, q_prev, r_prev = f, q, r

    lo, hi, q_lo = r_prev, r, q_prev
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        q_mid = _relax_fixed_bond(system, q_lo, mid)
        if _bond_force(system, q_mid) > 0:
            lo, q_lo = mid, q_mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    q, _ = _newton_polish(system, q_lo, tol)
    point = _make_point(system, system.from_positions(q), "saddle")
    if point.residual >= tol:
        raise SaddleSearchError(f"saddle residual {point.residual:.3e} above tolerance")
    if point.negative_count != 1:
        raise SaddleSearchError(
            f"drag ended on a point with {point.negative_count} negative eigenvalues"
        )
    logger.debug("drag saddle at central bond %.12f", r)
    return point


# ---------------------------------------------------------------------------
# analytic saddle
# ---------------------------------------------------------------------------


def force_balance(system, x_left):
    """Net force balance on the left central atom of a mirror-symmetric chain.

    ``x_left = q_c - q_0`` for ``c = center_left``.  All springs then share
    the length ``x_left / c`` and the central bond has length
    ``L - 2 x_left``.  Clearing the denominator ``(L - 2 x_left)^13`` turns
    the equation into a degree-14 polynomial with the same roots on
    ``(0, L/2)``.
    """
    c = system.center_left
    p = system.params
    r = system.length - 2.0 * x_left
    return p.spring_k * (x_left / c - p.spring_rest) - central_bond_energy(r, p, order=1)


def symmetric_config(system, x_left):
    """Mirror-symmetric configuration with equal spring bonds."""
    c = system.center_left
    a = x_left / c
    n = system.n_atoms
    i = np.arange(1, n - 1)
    q = np.where(
        i <= c,
        system.left_boundary + i * a,
        system.right_boundary - (n - 1 - i) * a,
    )
    return system.from_positions(q)


@dataclass(frozen=True, eq=False)
class PolynomialRoot:
    x_left: float
    central_bond: float
    residual: float
    negative_count: int
    config: np.ndarray


def saddle_polynomial_roots(system, n_grid=200_001):
    """All roots of the symmetric force balance on ``(0, L/2)``.

    Roots are bracketed by a sign scan on a uniform grid and refined with
    Brent's method.  Each root is returned with the number of negative
    Hessian eigenvalues of the assembled configuration.
    """
    half = 0.5 * system.length
    grid = np.linspace(0.0, half, n_grid)[1:-1]
    c = system.center_left
    p = system.params
    r = system.length - 2.0 * grid
    sr6 = (p.sigma / r) ** 6
    lj1 = 4.0 * p.epsilon * (-12.0 * sr6 * sr6 + 6.0 * sr6) / r
    vals = p.spring_k * (grid / c - p.spring_rest) - lj1
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    roots = []
    for i in idx:
        if vals[i] == 0.0:
            x = grid[i]
        elif vals[i + 1] == 0.0:
            continue  # picked up as the left end of the next interval
        else:
            x = brentq(lambda t: force_balance(system, t), grid[i], grid[i + 1], xtol=1e-15, rtol=8.9e-16, maxiter=500)
        cfg = symmetric_config(system, x)
        roots.append(
            PolynomialRoot(
                x_left=float(x),
                central_bond=float(system.length - 2.0 * x),
                residual=abs(force_balance(system, x)),
                negative_count=negative_count(hessian(system, cfg)),
                config=cfg,
            )
        )
    return roots


def find_saddle_analytic(system, tol=TOL_SADDLE):
    """Saddle from the scalar force balance, selecting the root whose
    configuration has exactly one negative Hessian eigenvalue."""
    roots = saddle_polynomial_roots(system)
    if not roots:
        raise SaddleSearchError("force balance has no root in (0, L/2)")
    for root in roots:
        logger.debug(
            "root x=%.12f bond=%.6f negatives=%d", root.x_left, root.central_bond, root.negative_count
        )
    saddles = [rt for rt in roots if rt.negative_count == 1 and rt.residual < tol]
    if not saddles:
        raise SaddleSearchError("no root yields a configuration with a single negative eigenvalue")
    if len(saddles) > 1:
        logger.warning("%d first-order saddle roots found; using the lowest-energy one", len(saddles))
    best = min(saddles, key=lambda rt: total_energy(system, rt.config))
    return _make_point(system, best.config, "saddle")


# ---------------------------------------------------------------------------
# analytic unstable mode
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticEigenmode:
    """Solution ``u_i = coeff_plus r_plus^i + coeff_minus r_minus^i`` of the
    interior difference equation, ``0 <= i <= n_springs``."""

    lambda_at: float
    r_plus: float
    r_minus: float
    coeff_plus: float
    coeff_minus: float
    u_center: float
    n_springs: int

    def values(self):
        """Mode values at atoms ``0..n_springs`` (``u_0 = 0``, ``u_c = u_center``)."""
        theta = np.log(self.r_plus)
        i = np.arange(self.n_springs + 1)
        c = self.n_springs
        # sinh(i theta) / sinh(c theta) without overflow
        num = np.exp((i - c) * theta) * -np.expm1(-2.0 * i * theta)
        den = -np.expm1(-2.0 * c * theta)
        return self.u_center * num / den


def _growth_rate(lambda_at, spring_k):
    mu = lambda_at / spring_k
    if not mu < 0:
        raise ValueError(f"lambda_at must be negative, got {lambda_at}")
    half = 0.5 * mu
    disc = half * (half - 2.0)
    if not disc > 0:
        raise ValueError("characteristic discriminant is not positive")
    # r_+ r_- = 1, so r_pm = exp(+-theta) with cosh(theta) = 1 - mu/2
    return np.arccosh(1.0 - half)


def analytic_eigenmode(lambda_at, u_center, n_springs, spring_k=1.0):
    """Closed-form left half of the unstable mode for unit masses.

    ``n_springs`` is the number of springs between the fixed left end and
    the left central atom (``center_left``).
    """
    _growth_rate(lambda_at, spring_k)
    half = 0.5 * lambda_at / spring_k
    root = np.sqrt(half * (half - 2.0))
    r_plus = 1.0 - half + root
    r_minus = 1.0 - half - root
    with np.errstate(over="ignore"):
        alpha = u_center / (r_plus**n_springs - r_minus**n_springs)
    return AnalyticEigenmode(
        lambda_at=float(lambda_at),
        r_plus=float(r_plus),
        r_minus=float(r_minus),
        coeff_plus=float(alpha),
        coeff_minus=float(-alpha),
        u_center=float(u_center),
        n_springs=int(n_springs),
    )


def analytic_unstable_mode(lambda_at, u_center, n_free, spring_k=1.0):
    """Full unstable mode over the ``n_free`` free atoms.

    The left half comes from the difference-equation solution; the right
    half follows from the antisymmetry ``u_{c+1+j} = -u_{c-j}``.
    """
    if n_free % 2:
        raise ValueError("n_free must be even")
    c = n_free // 2
    left = analytic_eigenmode(lambda_at, u_center, c, spring_k).values()[1:]
    return np.concatenate([left, -left[::-1]])


def _neighbour_ratio(theta, c):
    """``u_{c-1} / u_c = sinh((c-1) theta) / sinh(c theta)``."""
    if theta == 0.0:
        return (c - 1) / c
    return np.exp(-theta) * np.expm1(-2.0 * (c - 1) * theta) / np.expm1(-2.0 * c * theta)


def analytic_unstable_eigenvalue(system, saddle_config):
    """Negative eigenvalue of a symmetric saddle from its secular equation.

    Combines the difference-equation solution with the equation of motion
    of the left central atom, ``(k + 2 V_c'') u_c - k u_{c-1} = lambda u_c``.
    Only valid for unit masses.
    """
    if not system.unit_masses:
        raise ValueError("the closed-form mode assumes unit masses")
    c = system.center_left
    k = system.params.spring_k
    r_c = system.bond_lengths(saddle_config)[c]
    k_c = central_bond_energy(r_c, system.params, order=2)

    def secular(lam):
        theta = np.arccosh(1.0 - 0.5 * lam / k)
        return k * _neighbour_ratio(theta, c) - (k + 2.0 * k_c - lam)

    lo = min(2.0 * k_c - k, -k)
    hi = -1e-14 * k
    if secular(hi) <= 0:
        raise SaddleSearchError("configuration has no unstable antisymmetric mode")
    return brentq(secular, lo, hi, xtol=1e-16, rtol=8.9e-16, maxiter=500)
