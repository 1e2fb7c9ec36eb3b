"""Invariant checks over a sweep configuration.

Every check reports the worst residual it measured against a fixed
tolerance.  The suite is meant to be run from the command line with
``--verify``; a single failure makes the process exit with status 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSystem, gradient, hessian, total_energy
from .coarse import embed_min, partition_hessian, schur_complement
from .oracles import fd_gradient, fd_hessian, mc_log_z_saddle_coarse, quad_coarse_free_energy
from .rates import (
    RateParams,
    coarse_saddle_free_energy,
    log_z_saddle_atomistic,
    log_z_saddle_coarse,
)
from .stationary import (
    analytic_eigenmode,
    analytic_unstable_eigenvalue,
    analytic_unstable_mode,
    find_saddle_analytic,
    find_saddle_drag,
)
from .sweep import SaddleContext, iter_meshes, prepare_saddle

__all__ = ["CheckResult", "VerificationReport", "verify_suite"]

N_RANDOM_CONFIGS = 20
N_EMBED_VECTORS = 100
EMBED_STRIDE = 10
SMALL_CHAIN = 12
BETAS = (0.5, 1.0, 10.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        text = f"{tag}  {self.name:<34s} residual={self.residual:.3e}  tol={self.tolerance:.1e}"
        return f"{text}  {self.detail}" if self.detail else text


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def format(self):
        lines = [c.line() for c in self.checks]
        n_fail = len(self.failures())
        lines.append(f"{len(self.checks) - n_fail} of {len(self.checks)} checks passed")
        return "\n".join(lines)


class _Worst:
    """Running maximum of a residual, with the label where it occurred."""

    def __init__(self, name, tolerance):
        self.name = name
        self.tolerance = tolerance
        self.residual = 0.0
        self.where = ""
        self.count = 0

    def add(self, value, where=""):
        self.count += 1
        value = float(value)
        if math.isnan(self.residual):
            return
        if self.count == 1 or math.isnan(value) or value > self.residual:
            self.residual = value
            self.where = where

    def result(self, strict=False):
        ok = self.residual < self.tolerance if strict else self.residual <= self.tolerance
        ok = ok and not math.isnan(self.residual)
        detail = f"n={self.count}" + (f" worst at {self.where}" if self.where else "")
        return CheckResult(self.name, bool(ok), self.residual, self.tolerance, detail)


def _random_configs(system, rng, n):
    base = system.positions(system.uniform_config())[1:-1]
    spacing = system.length / (system.n_atoms - 1)
    for _ in range(n):
        q = base + rng.uniform(-0.15, 0.15, base.size) * spacing
        yield system.from_positions(q)


# ---------------------------------------------------------------------------
# chain-level checks
# ---------------------------------------------------------------------------


def _derivative_checks(system, rng):
    grad_chk = _Worst("gradient_vs_fd", 1e-6)
    hess_chk = _Worst("hessian_vs_fd", 1e-5)
    mirror_chk = _Worst("mirror_invariance", 1e-12)
    for k, x in enumerate(_random_configs(system, rng, N_RANDOM_CONFIGS)):
        g = gradient(system, x)
        g_fd = fd_gradient(lambda y: total_energy(system, y), x)
        grad_chk.add(np.max(np.abs(g - g_fd)) / max(np.max(np.abs(g)), 1e-300), f"config {k}")
        H = hessian(system, x)
        H_fd = fd_hessian(lambda y: gradient(system, y), x)
        hess_chk.add(np.max(np.abs(H - H_fd)) / np.max(np.abs(H)), f"config {k}")
        e, em = total_energy(system, x), total_energy(system, system.mirror(x))
        mirror_chk.add(abs(e - em) / max(abs(e), 1.0), f"config {k}")
    return [grad_chk.result(strict=True), hess_chk.result(strict=True), mirror_chk.result()]


def _saddle_checks(ctx, drag_config, analytic_config):
    system, s = ctx.system, ctx.system.strain
    tag = f"s={s:g}"
    out = []

    gap = float(np.max(np.abs(drag_config - analytic_config)))
    out.append(CheckResult(f"saddle_drag_vs_analytic[{tag}]", gap < 1e-8, gap, 1e-8))

    x = ctx.saddle_config
    asym = float(np.max(np.abs(x - system.mirror(x))))
    out.append(CheckResult(f"saddle_symmetry[{tag}]", asym < 1e-10, asym, 1e-10))

    bonds = system.bond_lengths(x)
    c = system.center_left
    springs = np.delete(bonds, c)
    spread = float(np.max(springs) - np.min(springs))
    out.append(CheckResult(f"saddle_equal_springs[{tag}]", spread < 1e-10, spread, 1e-10))

    lam_sec = analytic_unstable_eigenvalue(system, x)
    lam_gap = abs(lam_sec - ctx.lambda_at) / abs(ctx.lambda_at)
    out.append(CheckResult(f"analytic_eigenvalue[{tag}]", lam_gap < 1e-8, lam_gap, 1e-8))

    u_c = ctx.u_at[c - 1]
    u = analytic_unstable_mode(lam_sec, u_c, system.n_free, system.params.spring_k)
    cos = abs(float(u @ ctx.u_at)) / (np.linalg.norm(u) * np.linalg.norm(ctx.u_at))
    defect = max(0.0, 1.0 - cos)
    out.append(CheckResult(f"analytic_mode_cosine[{tag}]", defect < 1e-8, defect, 1e-8))

    mode = analytic_eigenmode(lam_sec, u_c, c, system.params.spring_k)
    k = system.params.spring_k
    roots = max(
        abs(mode.r_plus * mode.r_minus - 1.0),
        abs(mode.r_plus + mode.r_minus - (2.0 - lam_sec / k)),
        abs(mode.values()[0]),
    )
    ok = roots < 1e-12 and mode.r_plus > 1.0 > mode.r_minus > 0.0
    out.append(CheckResult(f"characteristic_roots[{tag}]", ok, roots, 1e-12))
    return out


def _symmetry_check(D, transform):
    if transform is not None:
        D = transform(D)
    asym = float(np.max(np.abs(D - D.T)))
    return CheckResult("hessian_symmetry", asym == 0.0, asym, 0.0, "bitwise")


# ---------------------------------------------------------------------------
# mesh-level checks
# ---------------------------------------------------------------------------


def _log_ratio(ctx, res, beta):
    params = RateParams(beta=beta)
    z_at = log_z_saddle_atomistic(ctx.saddle_energy, ctx.eigenvalues, params)
    z_cg = log_z_saddle_coarse(
        ctx.saddle_energy, res.eigenvalues_cg, res.coarse.log_det_C, res.part.n_constrained, params
    )
    return z_cg - z_at


def _interlacing_residual(eig_at, eig_cg):
    """Cauchy interlacing of ``D_cg^{-1}`` inside ``D_at^{-1}``; positive means violated."""
    nu = np.sort(1.0 / eig_at)
    mu = np.sort(1.0 / eig_cg)
    n, m = nu.size, mu.size
    lower = nu[:m] - mu
    upper = mu - nu[n - m :]
    return float(max(np.max(lower), np.max(upper))) / float(np.max(np.abs(nu)))


def _embedding_residuals(ctx, res, rng):
    part = res.part
    D = ctx.D_at
    scale = float(np.max(np.sum(np.abs(D), axis=1)))
    V = rng.standard_normal((part.n_repatoms, N_EMBED_VECTORS))
    V /= np.linalg.norm(V, axis=0)
    worst_block, worst_form = 0.0, 0.0
    for v in V.T:
        vmin = embed_min(part, v)
        Dv = D @ vmin
        _, block = part.split(Dv)
        if block.size:
            worst_block = max(worst_block, float(np.max(np.abs(block))) / scale)
        form_gap = abs(float(v @ res.coarse.D_cg @ v) - float(vmin @ Dv))
        worst_form = max(worst_form, form_gap)
    return worst_block, worst_form


def _schur_composition(ctx, repatoms, res):
    """Eliminating in two stages must match eliminating at once."""
    idx = repatoms.as_array()
    if idx.size < 3:
        return 0.0
    inner = idx[1:-1]
    pos = np.searchsorted(idx, inner)
    two_stage = schur_complement(partition_hessian(res.coarse.D_cg, pos)).D_cg
    direct = schur_complement(partition_hessian(ctx.D_at, inner)).D_cg
    return float(np.max(np.abs(two_stage - direct))) / float(np.max(np.abs(ctx.D_at)))


def _mesh_checks(config, contexts, rng):
    c_spd = _Worst("constrained_block_spd", 0.0)
    well = _Worst("eigenvalue_ordering", 1e-12)
    interlace = _Worst("interlacing_inverse", 1e-9)
    det = _Worst("determinant_identity", 1e-8)
    ident = _Worst("error_identity_residual", 1e-8)
    ratio = _Worst("rate_ratio_consistency", 1e-8)
    temp = _Worst("temperature_invariance", 1e-10)
    block = _Worst("embedding_constrained_block", 1e-10)
    form = _Worst("embedding_quadratic_form", 1e-10)
    compose = _Worst("schur_composition", 1e-9)
    full = _Worst("full_resolution_exact", 1e-12)
    mono = _Worst("nested_monotonicity", 1e-12)
    order = _Worst("scheme_ordering", 1e-12)

    n_free = config.n_atoms - 2
    errors = {}
    local_lam, rel_err = {}, {}
    for i, (scheme, strain, core, reps, ctx, res) in enumerate(iter_meshes(config, contexts)):
        where = f"{scheme} s={strain:g} N={core}"
        if isinstance(res, Exception):
            c_spd.add(1.0, where)
            errors[where] = res
            continue
        c_spd.add(0.0, where)
        lam_at, lam_cg = ctx.lambda_at, res.lambda_cg
        well.add(max(0.0, (lam_cg - lam_at) / abs(lam_at)), where)
        interlace.add(max(0.0, _interlacing_residual(ctx.eigenvalues, res.eigenvalues_cg)), where)

        s_at, ld_at = np.linalg.slogdet(ctx.D_at)
        s_cg, ld_cg = np.linalg.slogdet(res.coarse.D_cg)
        det.add(abs(ld_at - res.coarse.log_det_C - ld_cg) + (0.0 if s_at == s_cg else 1.0), where)
        ident.add(res.breakdown.identity_residual / abs(lam_at), where)

        target = math.sqrt(lam_cg / lam_at)
        ratios = [math.exp(_log_ratio(ctx, res, b)) for b in BETAS]
        ratio.add(abs(ratios[1] - target), where)
        temp.add(max(ratios) - min(ratios), where)

        if core % EMBED_STRIDE == 0 or core == n_free or config.n_atoms <= SMALL_CHAIN:
            b, f = _embedding_residuals(ctx, res, rng)
            block.add(b, where)
            form.add(f, where)
            compose.add(_schur_composition(ctx, reps, res), where)

        rel_err[scheme, strain, len(reps)] = res.breakdown.rel_rate_error
        if scheme == "localized":
            local_lam[strain, core] = (lam_cg, lam_at)
            if core == n_free:
                full.add(max(abs(lam_cg - lam_at) / abs(lam_at), res.breakdown.rel_rate_error), where)

    for (strain, core), (lam_cg, lam_at) in local_lam.items():
        nxt = local_lam.get((strain, core + 2))
        if nxt is not None:
            mono.add(max(0.0, (abs(nxt[0]) - abs(lam_cg)) / abs(lam_at)), f"s={strain:g} N={core}")
    for (scheme, strain, n_rep), err in rel_err.items():
        if scheme != "delocalized":
            continue
        loc = rel_err.get(("localized", strain, n_rep))
        if loc is not None:
            order.add(max(0.0, loc - err), f"s={strain:g} n_rep={n_rep}")

    checks = [c_spd.result(), well.result(), interlace.result(), det.result(strict=True)]
    checks += [ident.result(strict=True), ratio.result(strict=True), temp.result(strict=True)]
    checks += [block.result(strict=True), form.result(strict=True), compose.result(strict=True)]
    for chk in (full, mono, order):
        if chk.count:
            checks.append(chk.result())
    if errors:
        first = next(iter(errors.items()))
        checks[0] = CheckResult(
            c_spd.name, False, float(len(errors)), 0.0, f"{len(errors)} meshes failed; first {first[0]}: {first[1]}"
        )
    return checks


# ---------------------------------------------------------------------------
# small-chain oracles
# ---------------------------------------------------------------------------


def _small_chain_checks(config, contexts, rng):
    mc = _Worst("monte_carlo_saddle_z", 0.01)
    quad = _Worst("quadrature_free_energy", 1e-6)
    params = RateParams(beta=config.beta)
    seen = set()
    for scheme, strain, core, reps, ctx, res in iter_meshes(config, contexts):
        if isinstance(res, Exception) or res.part.n_constrained > 3:
            continue
        key = (strain, reps.indices)
        if key in seen:
            continue
        seen.add(key)
        where = f"{scheme} s={strain:g} N={core}"
        closed = log_z_saddle_coarse(
            ctx.saddle_energy, res.eigenvalues_cg, res.coarse.log_det_C, res.part.n_constrained, params
        )
        est, _ = mc_log_z_saddle_coarse(
            res.part, res.v_cg, ctx.saddle_energy, config.beta, n_points=2**17, seed=len(seen)
        )
        mc.add(abs(math.expm1(closed - est)), where)
        if res.part.n_constrained == 2:
            u_r = 0.1 * rng.standard_normal(res.part.n_repatoms)
            ref = quad_coarse_free_energy(res.part, u_r, ctx.saddle_energy, config.beta)
            val = coarse_saddle_free_energy(u_r, res.part, ctx.saddle_energy, params)
            quad.add(abs(val - ref), where)
    out = []
    for chk in (mc, quad):
        if chk.count:
            out.append(chk.result(strict=True))
    return out


# ---------------------------------------------------------------------------


def _contexts(config):
    contexts, saddle_pairs = {}, {}
    for strain in config.strains:
        system = ChainSystem.stretched(strain, config.n_atoms)
        drag = find_saddle_drag(system)
        analytic = find_saddle_analytic(system)
        contexts[strain] = prepare_saddle(config.n_atoms, strain, "analytic")
        saddle_pairs[strain] = (drag.config, analytic.config)
    return contexts, saddle_pairs


def verify_suite(config, hessian_transform=None, seed=0):
    """Run every invariant check for ``config``.

    Parameters
    ----------
    config : SweepConfig
    hessian_transform : callable, optional
        Applied to the saddle Hessian before the symmetry check.  Used as a
        negative control: a corrupted Hessian must fail.
    seed : int
        Seed for random configurations and test vectors.

    Returns
    -------
    VerificationReport
    """
    rng = np.random.default_rng(seed)
    checks = []
    first = ChainSystem.stretched(config.strains[0], config.n_atoms)
    checks += _derivative_checks(first, rng)

    try:
        contexts, pairs = _contexts(config)
    except Exception as exc:  # noqa: BLE001 - any saddle failure fails the suite
        checks.append(CheckResult("saddle_search", False, math.nan, 0.0, f"{type(exc).__name__}: {exc}"))
        return VerificationReport(tuple(checks))

    ctx0 = contexts[config.strains[0]]
    checks.append(_symmetry_check(ctx0.D_at, hessian_transform))
    for strain in config.strains:
        ctx = contexts[strain]
        assert isinstance(ctx, SaddleContext)
        checks += _saddle_checks(ctx, *pairs[strain])

    checks += _mesh_checks(config, contexts, rng)
    if config.n_atoms <= SMALL_CHAIN:
        checks += _small_chain_checks(config, contexts, rng)
    return VerificationReport(tuple(checks))
