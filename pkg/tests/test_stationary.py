import numpy as np
import pytest

from cgtst.chain import ChainSystem, central_bond_energy, gradient, hessian
from cgtst.errors import SaddleSearchError
from cgtst.stationary import (
    analytic_eigenmode,
    analytic_unstable_eigenvalue,
    analytic_unstable_mode,
    find_minimum,
    find_saddle_analytic,
    find_saddle_drag,
    force_balance,
    saddle_polynomial_roots,
    symmetric_config,
)

STRAINS = (1.02, 1.035)


@pytest.fixture(scope="module", params=STRAINS)
def saddle_pair(request):
    system = ChainSystem.stretched(request.param)
    return system, find_saddle_drag(system), find_saddle_analytic(system)


# ---------------------------------------------------------------------------
# minimum
# ---------------------------------------------------------------------------


def test_four_atom_minimum_is_exact():
    system = ChainSystem.stretched(1.0, 4)
    start = system.uniform_config() + np.array([0.05, -0.03])
    m = find_minimum(system, start)
    assert m.kind == "minimum"
    assert m.negative_count == 0
    assert m.config == pytest.approx([1.0, 2.0], abs=1e-12)
    assert m.energy == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("strain", STRAINS)
def test_minimum_is_idempotent(strain):
    system = ChainSystem.stretched(strain)
    m1 = find_minimum(system)
    m2 = find_minimum(system, m1.config)
    assert m1.residual < 1e-10
    assert np.max(np.abs(m1.config - m2.config)) < 1e-12
    assert m2.energy == pytest.approx(m1.energy, rel=1e-14)


@pytest.mark.parametrize("strain", STRAINS)
def test_intact_minimum_is_symmetric(strain):
    system = ChainSystem.stretched(strain)
    m = find_minimum(system)
    assert np.max(np.abs(m.config - system.mirror(m.config))) < 1e-10
    assert system.bond_lengths(m.config)[system.center_left] < 1.01


# ---------------------------------------------------------------------------
# saddles
# ---------------------------------------------------------------------------


def test_drag_and_analytic_saddles_agree(saddle_pair):
    system, drag, analytic = saddle_pair
    assert np.max(np.abs(drag.config - analytic.config)) < 1e-8
    assert drag.energy == pytest.approx(analytic.energy, rel=1e-12)


def test_saddle_is_first_order(saddle_pair):
    _, drag, analytic = saddle_pair
    for p in (drag, analytic):
        assert p.kind == "saddle"
        assert p.negative_count == 1
        assert p.residual < 1e-10


def test_saddle_symmetry_and_equal_springs(saddle_pair):
    system, _, p = saddle_pair
    assert np.max(np.abs(p.config - system.mirror(p.config))) < 1e-10
    springs = np.delete(system.bond_lengths(p.config), system.center_left)
    assert np.ptp(springs) < 1e-10


@pytest.mark.parametrize(
    "strain, bond, lam",
    [(1.02, 2.694, -0.003431), (1.035, 2.371, -0.023739)],
)
def test_saddle_reference_values(strain, bond, lam):
    # reference values from an independent prototype of the force balance
    system = ChainSystem.stretched(strain)
    p = find_saddle_analytic(system)
    assert system.bond_lengths(p.config)[system.center_left] == pytest.approx(bond, abs=1e-3)
    assert np.linalg.eigvalsh(hessian(system, p.config))[0] == pytest.approx(lam, abs=1e-6)


def test_roots_report_every_branch():
    system = ChainSystem.stretched(1.02)
    roots = saddle_polynomial_roots(system)
    bonds = sorted(r.central_bond for r in roots)
    assert len(roots) == 3
    assert bonds == pytest.approx([1.00028, 2.694, 4.989], abs=1e-3)
    signature = {round(r.central_bond, 1): r.negative_count for r in roots}
    assert signature == {1.0: 0, 2.7: 1, 5.0: 0}
    for r in roots:
        assert abs(force_balance(system, r.x_left)) < 1e-10
        assert np.max(np.abs(gradient(system, r.config))) < 1e-10


def test_force_balance_accounts_for_rest_length():
    system = ChainSystem.stretched(1.02)
    c = system.center_left
    x = 0.4 * system.length
    r = system.length - 2 * x
    expected = (x / c - 1.0) - central_bond_energy(r, order=1)
    assert force_balance(system, x) == pytest.approx(expected)


def test_symmetric_config_is_mirror_symmetric():
    system = ChainSystem.stretched(1.035, 10)
    x = symmetric_config(system, 3.5)
    assert np.allclose(x, system.mirror(x), atol=1e-14)


def test_small_chain_without_saddle_raises():
    system = ChainSystem.stretched(1.02, 8)
    with pytest.raises(SaddleSearchError):
        find_saddle_analytic(system)
    with pytest.raises(SaddleSearchError):
        find_saddle_drag(system)


def test_small_chain_saddle(small_context):
    assert small_context.drag_analytic_gap < 1e-8
    assert small_context.lambda_at == pytest.approx(-1.0899475927, abs=1e-9)


# ---------------------------------------------------------------------------
# analytic unstable mode
# ---------------------------------------------------------------------------


def test_analytic_eigenvalue_matches_dense(saddle_pair):
    system, _, p = saddle_pair
    lam = analytic_unstable_eigenvalue(system, p.config)
    assert lam == pytest.approx(np.linalg.eigvalsh(hessian(system, p.config))[0], rel=1e-10)


def test_analytic_mode_matches_dense_eigenvector(saddle_pair):
    system, _, p = saddle_pair
    w, V = np.linalg.eigh(hessian(system, p.config))
    u = V[:, 0]
    c = system.center_left
    lam = analytic_unstable_eigenvalue(system, p.config)
    ua = analytic_unstable_mode(lam, u[c - 1], system.n_free)
    cos = abs(ua @ u) / (np.linalg.norm(ua) * np.linalg.norm(u))
    assert cos > 1 - 1e-8
    assert ua[c - 1] == u[c - 1]
    assert ua == pytest.approx(-ua[::-1])


@pytest.mark.parametrize("lam", [-1e-4, -0.003431, -0.5, -3.0])
def test_characteristic_roots(lam):
    m = analytic_eigenmode(lam, 0.3, 100)
    assert m.r_plus * m.r_minus == pytest.approx(1.0, abs=1e-12)
    assert m.r_plus + m.r_minus == pytest.approx(2.0 - lam, abs=1e-12)
    assert m.r_plus > 1.0 > m.r_minus > 0.0
    assert m.coeff_minus == -m.coeff_plus
    u = m.values()
    assert u[0] == 0.0
    assert u[-1] == pytest.approx(0.3)


def test_mode_obeys_difference_equation():
    lam = -0.2
    m = analytic_eigenmode(lam, 1.0, 12)
    u = m.values()
    # interior rows of the spring Hessian: -u_{i-1} + 2 u_i - u_{i+1} = lam u_i
    lhs = -u[:-2] + 2 * u[1:-1] - u[2:]
    assert lhs == pytest.approx(lam * u[1:-1], abs=1e-13)
    direct = m.coeff_plus * m.r_plus ** np.arange(13) + m.coeff_minus * m.r_minus ** np.arange(13)
    assert u == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.5])
def test_mode_needs_negative_eigenvalue(lam):
    with pytest.raises(ValueError):
        analytic_eigenmode(lam, 1.0, 10)


def test_large_chain_mode_does_not_overflow():
    u = analytic_eigenmode(-3.0, 1.0, 5000).values()
    assert np.all(np.isfinite(u))
    assert u[-1] == pytest.approx(1.0)
