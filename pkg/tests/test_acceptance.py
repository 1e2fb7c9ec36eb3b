"""Acceptance criteria, each checked at its stated tolerance.

Every test records a one-line PASS/FAIL verdict with the measured value;
the lines are printed in the terminal summary (see ``conftest.py``).
"""

import math

import numpy as np
import pytest

from cgtst.chain import ChainSystem, gradient, hessian, total_energy
from cgtst.coarse import embed_min
from cgtst.oracles import fd_gradient, fd_hessian, mc_log_z_saddle_coarse, quad_coarse_free_energy
from cgtst.rates import RateParams, coarse_saddle_free_energy, log_z_saddle_atomistic, log_z_saddle_coarse
from cgtst.stationary import (
    analytic_unstable_eigenvalue,
    analytic_unstable_mode,
    find_saddle_analytic,
    find_saddle_drag,
)
from cgtst.sweep import SweepConfig, iter_meshes, prepare_contexts

VERDICTS = {}


def record(number, title, passed, detail):
    VERDICTS[number] = f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {title}: {detail}"
    assert passed, VERDICTS[number]


@pytest.fixture(scope="module")
def mesh_results(default_config, contexts):
    out = []
    for scheme, strain, core, reps, ctx, res in iter_meshes(default_config, contexts):
        assert not isinstance(res, Exception), f"{scheme} {strain} {core}: {res}"
        out.append((scheme, strain, core, ctx, res))
    return out


def _table(rows, scheme, strain):
    return {r.n_repatoms: r for r in rows if r.scheme == scheme and r.strain == strain}


def test_01_one_percent_threshold(sweep_rows):
    col = _table(sweep_rows, "localized", 1.035)
    sizes = sorted(col)
    ok_from = [n for n in sizes if 40 <= n <= 50 and all(col[m].rel_rate_error < 0.01 for m in sizes if m >= n)]
    first_below = min(n for n in sizes if all(col[m].rel_rate_error < 0.01 for m in sizes if m >= n))
    record(
        1,
        "localized error at s=1.035 drops below 1% by 40-50 repatoms and stays there",
        bool(ok_from),
        f"error at N=40: {col[40].rel_rate_error:.3e}, N=50: {col[50].rel_rate_error:.3e}; "
        f"stays below 1% from N={first_below}",
    )


def test_02_scheme_ordering(sweep_rows):
    tie = 1e-12
    worst, compared, strict = 0.0, 0, 0
    for strain in (1.02, 1.035):
        loc = _table(sweep_rows, "localized", strain)
        for r in sweep_rows:
            if r.scheme != "delocalized" or r.strain != strain:
                continue
            gap = loc[r.n_repatoms].rel_rate_error - r.rel_rate_error
            worst = max(worst, gap)
            strict += gap > 0
            compared += 1
    record(
        2,
        "localized error <= delocalized at matched repatom count",
        worst <= tie,
        f"{compared} pairs, largest excess {worst:.2e} (roundoff tie tolerance {tie:g}, {strict} pairs above 0)",
    )


def test_03_eigenvalue_ordering(mesh_results):
    viol = [
        (res.lambda_cg - ctx.lambda_at) / abs(ctx.lambda_at)
        for _, _, _, ctx, res in mesh_results
        if res.lambda_cg > ctx.lambda_at + 1e-12 * abs(ctx.lambda_at)
    ]
    record(3, "|lambda_cg| >= |lambda_at| on every mesh", not viol, f"{len(mesh_results)} meshes, {len(viol)} violations")


def test_04_error_identity(mesh_results):
    worst = max(res.breakdown.identity_residual / abs(ctx.lambda_at) for *_, ctx, res in mesh_results)
    record(4, "eigenvalue-shift identity relative residual < 1e-8", worst < 1e-8, f"max {worst:.2e}")


def test_05_determinant_and_rate_ratio(mesh_results):
    det_worst, ratio_worst = 0.0, 0.0
    for *_, ctx, res in mesh_results:
        ld_at = np.linalg.slogdet(ctx.D_at)[1]
        ld_cg = np.linalg.slogdet(res.coarse.D_cg)[1]
        det_worst = max(det_worst, abs(ld_at - res.coarse.log_det_C - ld_cg))
        z_at = log_z_saddle_atomistic(ctx.saddle_energy, ctx.eigenvalues)
        z_cg = log_z_saddle_coarse(ctx.saddle_energy, res.eigenvalues_cg, res.coarse.log_det_C, res.part.n_constrained)
        ratio_worst = max(ratio_worst, abs(math.exp(z_cg - z_at) - math.sqrt(res.lambda_cg / ctx.lambda_at)))
    record(
        5,
        "log-determinant identity and rate-ratio consistency < 1e-8",
        det_worst < 1e-8 and ratio_worst < 1e-8,
        f"det max {det_worst:.2e}, ratio max {ratio_worst:.2e}",
    )


def test_06_embedding(mesh_results):
    rng = np.random.default_rng(6)
    block_worst, form_worst, n_mesh = 0.0, 0.0, 0
    for _, _, core, ctx, res in mesh_results:
        if core % 10 and core not in (2, 4):
            continue
        n_mesh += 1
        scale = np.max(np.sum(np.abs(ctx.D_at), axis=1))
        for _ in range(100):
            v = rng.standard_normal(res.part.n_repatoms)
            v /= np.linalg.norm(v)
            vmin = embed_min(res.part, v)
            Dv = ctx.D_at @ vmin
            _, c = res.part.split(Dv)
            if c.size:
                block_worst = max(block_worst, np.max(np.abs(c)) / scale)
            form_worst = max(form_worst, abs(v @ res.coarse.D_cg @ v - vmin @ Dv))
    record(
        6,
        "embedded vectors: constrained force < 1e-10 ||D||, energies agree < 1e-10",
        block_worst < 1e-10 and form_worst < 1e-10,
        f"{n_mesh} meshes x 100 vectors, block {block_worst:.2e}, form {form_worst:.2e}",
    )


@pytest.fixture(scope="module")
def saddles():
    out = {}
    for s in (1.02, 1.035):
        system = ChainSystem.stretched(s)
        out[s] = (system, find_saddle_drag(system), find_saddle_analytic(system))
    return out


def test_07_saddle_cross_validation(saddles):
    gap = sym = spread = 0.0
    for system, drag, analytic in saddles.values():
        gap = max(gap, np.max(np.abs(drag.config - analytic.config)))
        for p in (drag, analytic):
            sym = max(sym, np.max(np.abs(p.config - system.mirror(p.config))))
            spread = max(spread, np.ptp(np.delete(system.bond_lengths(p.config), system.center_left)))
    record(
        7,
        "drag and force-balance saddles agree < 1e-8; symmetric, equal springs < 1e-10",
        gap < 1e-8 and sym < 1e-10 and spread < 1e-10,
        f"gap {gap:.2e}, asymmetry {sym:.2e}, spring spread {spread:.2e}",
    )


def test_08_analytic_eigenmode(saddles):
    worst = 0.0
    for system, _, p in saddles.values():
        w, V = np.linalg.eigh(hessian(system, p.config))
        lam = analytic_unstable_eigenvalue(system, p.config)
        u = analytic_unstable_mode(lam, V[system.center_left - 1, 0], system.n_free)
        cos = abs(u @ V[:, 0]) / np.linalg.norm(u)
        worst = max(worst, 1.0 - cos)
    record(8, "closed-form unstable mode cosine > 1 - 1e-8", worst < 1e-8, f"max 1 - cos = {max(worst, 0.0):.2e}")


def test_09_derivative_oracles():
    rng = np.random.default_rng(9)
    system = ChainSystem.stretched(1.035)
    base = system.positions(system.uniform_config())[1:-1]
    g_worst = h_worst = 0.0
    for _ in range(20):
        x = system.from_positions(base + rng.uniform(-0.15, 0.15, base.size) * 1.035)
        g = gradient(system, x)
        g_worst = max(g_worst, np.max(np.abs(g - fd_gradient(lambda y: total_energy(system, y), x))) / np.max(np.abs(g)))
        H = hessian(system, x)
        H_fd = fd_hessian(lambda y: gradient(system, y), x)
        h_worst = max(h_worst, np.max(np.abs(H - H_fd)) / np.max(np.abs(H)))
    record(
        9,
        "gradient vs FD < 1e-6, Hessian vs FD < 1e-5 (20 configurations)",
        g_worst < 1e-6 and h_worst < 1e-5,
        f"gradient {g_worst:.2e}, Hessian {h_worst:.2e}",
    )


def test_10_temperature_invariance(mesh_results):
    worst = 0.0
    for *_, ctx, res in mesh_results:
        ratios = []
        for beta in (0.5, 1.0, 10.0):
            p = RateParams(beta=beta)
            z_at = log_z_saddle_atomistic(ctx.saddle_energy, ctx.eigenvalues, p)
            z_cg = log_z_saddle_coarse(
                ctx.saddle_energy, res.eigenvalues_cg, res.coarse.log_det_C, res.part.n_constrained, p
            )
            ratios.append(math.exp(z_cg - z_at))
        worst = max(worst, max(ratios) - min(ratios))
    record(10, "coarse/atomistic rate ratio identical for beta in {0.5, 1, 10}", worst < 1e-10, f"max spread {worst:.2e}")


def test_11_small_chain_oracles():
    cfg = SweepConfig(n_atoms=8, strains=(1.3,))
    contexts = prepare_contexts(cfg)
    rng = np.random.default_rng(11)
    mc_worst = quad_worst = 0.0
    n_mc = n_quad = 0
    seen = set()
    for scheme, strain, core, reps, ctx, res in iter_meshes(cfg, contexts):
        if res.part.n_constrained > 3 or reps.indices in seen:
            continue
        seen.add(reps.indices)
        closed = log_z_saddle_coarse(ctx.saddle_energy, res.eigenvalues_cg, res.coarse.log_det_C, res.part.n_constrained)
        est, _ = mc_log_z_saddle_coarse(res.part, res.v_cg, ctx.saddle_energy, 1.0, seed=len(seen))
        mc_worst = max(mc_worst, abs(math.expm1(closed - est)))
        n_mc += 1
        if res.part.n_constrained == 2:
            u_r = 0.1 * rng.standard_normal(res.part.n_repatoms)
            ref = quad_coarse_free_energy(res.part, u_r, ctx.saddle_energy, 1.0)
            quad_worst = max(quad_worst, abs(coarse_saddle_free_energy(u_r, res.part, ctx.saddle_energy) - ref))
            n_quad += 1
    record(
        11,
        "8-atom chain: closed-form coarse Z within 1% of sampling, free energy within 1e-6 of quadrature",
        mc_worst < 0.01 and quad_worst < 1e-6 and n_mc > 0 and n_quad > 0,
        f"Z rel. dev. {mc_worst:.2e} ({n_mc} meshes), free energy {quad_worst:.2e} ({n_quad} meshes)",
    )


def test_12_nested_monotonicity(sweep_rows):
    worst, n = 0.0, 0
    for strain in (1.02, 1.035):
        col = _table(sweep_rows, "localized", strain)
        sizes = sorted(col)
        for a, b in zip(sizes, sizes[1:]):
            lam_at = abs(col[a].lambda_at)
            worst = max(worst, (abs(col[b].lambda_cg) - abs(col[a].lambda_cg)) / lam_at)
            n += 1
    record(
        12,
        "localized |lambda_cg| non-increasing in core size",
        worst <= 1e-12,
        f"{n} steps, largest increase {max(worst, 0.0):.2e} x |lambda_at|",
    )
