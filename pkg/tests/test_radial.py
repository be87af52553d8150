import warnings

import numpy as np
import pytest

from coatfkpp.coated import CoatingSpec, coated_operators, single_domain_operators
from coatfkpp.radial import (RadialGrid, ThetaStepper, assemble, bulk_grid, coated_grid, logistic_flow,
                             p1_norm_squared, solve_tridiagonal)
from coatfkpp.surface import ParameterDomainError, build_surface


def test_grids():
    g = coated_grid(1.0, 0.1, 8, 4)
    assert g.n_nodes == 13 and g.iface == 8 and g.nodes[8] == 1.0
    assert g.outer == pytest.approx(1.1)
    assert g.region_mask("bulk").sum() == 8 and g.region_mask("coating").sum() == 4
    assert g.bulk().n_nodes == 9 and not g.bulk().has_coating
    with pytest.raises(ValueError):
        g.region_mask("shell")
    for bad in [(1.0, 0.5, 8, 4), (1.0, 0.0, 8, 4), (1.0, 0.1, 1, 4), (1.0, 0.1, 8, 0)]:
        with pytest.raises(ParameterDomainError):
            coated_grid(*bad)
    with pytest.raises(ParameterDomainError):
        bulk_grid(-1.0, 8)


def test_repeated_nodes_rejected():
    g = RadialGrid(np.array([0.0, 0.5, 0.5, 1.0]), 1.0, 3)
    with pytest.raises(ParameterDomainError):
        assemble(g, np.array([0.0]), 1.0, 1.0)


def test_constants_in_kernel_of_radial_mode():
    spec = CoatingSpec(1.0, 0.3, 2.0, 0.1)
    sp = build_surface("sphere", 1.0, 2)
    ops = coated_operators(spec, sp, 64, 8)
    u = np.ones(ops.diag.shape)
    r = ops.matvec(u)[0]
    # every row except the last free node (next to the held outer node)
    assert np.max(np.abs(r[1:-2])) <= 1e-12


def test_solid_harmonic_is_discrete_harmonic():
    sp = build_surface("sphere", 1.0, 2)
    nodes = np.linspace(0, 1, 101)
    ops = single_domain_operators(nodes, 1.0, sp.eigenvalues, 1.0)
    u = np.zeros(ops.diag.shape)
    u[1] = nodes
    r = ops.matvec(u)[1]
    assert np.max(np.abs(r[1:-2])) <= 1e-12


def test_isotropic_coating_equals_single_domain():
    sp = build_surface("sphere", 1.0, 6)
    spec = CoatingSpec(1.3, 1.3, 1.3, 0.1)
    a = coated_operators(spec, sp, 40, 10)
    b = single_domain_operators(a.grid.nodes, 1.0, sp.eigenvalues, 1.3)
    assert np.max(np.abs(a.diag - b.diag)) <= 1e-12 * np.abs(b.diag).max()
    assert np.max(np.abs(a.off - b.off)) <= 1e-12 * np.abs(b.off).max()
    np.testing.assert_array_equal(a.fixed, b.fixed)
    np.testing.assert_allclose(a.mass_diag, b.mass_diag, rtol=1e-14)


def test_interface_flux_continuity():
    # piecewise-linear radial profile with k u' = sigma u' across R1 is in the kernel
    # of the 1-D (d = 1) flux form on interior rows
    k, sigma = 1.0, 0.2
    sp = build_surface("circle", 1.0, 0)
    grid = coated_grid(1.0, 0.2, 20, 10, dim=1)
    ops = assemble(grid, sp.eigenvalues, k, k, sigma, 1.0)
    x = grid.nodes
    u = np.where(x <= 1.0, x, 1.0 + (k / sigma) * (x - 1.0))
    r = ops.matvec(u[None, :])[0]
    assert np.max(np.abs(r[1:-1])) <= 1e-12


def test_operators_symmetric_positive():
    sp = build_surface("sphere", 1.0, 4)
    ops = coated_operators(CoatingSpec(1.0, 0.01, 50.0, 0.05), sp, 32, 8)
    for l in range(sp.n_modes):
        free, md, mo, kd, ko = ops.mode(l)
        K = np.diag(kd) + np.diag(ko, 1) + np.diag(ko, -1)
        assert np.all(np.linalg.eigvalsh(K) > 0)


def test_theta_stepper_validation():
    sp = build_surface("sphere", 1.0, 2)
    ops = coated_operators(CoatingSpec(1.0, 1.0, 1.0, 0.1), sp, 16, 4)
    with pytest.raises(ParameterDomainError):
        ThetaStepper(ops, 0.0)
    with pytest.raises(ParameterDomainError):
        ThetaStepper(ops, 1e-3, 1.5)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        ThetaStepper(ops, 1e-9, 1.0)
    assert any("positivity" in str(x.message) for x in w)


def test_solve_tridiagonal_and_logistic():
    x = solve_tridiagonal([1.0, 1.0], [4.0, 4.0, 4.0], [1.0, 1.0], [5.0, 6.0, 5.0])
    np.testing.assert_allclose(x, [1.0, 1.0, 1.0])
    assert logistic_flow(0.5, 1.0) == pytest.approx(np.e / (1 + np.e), rel=1e-15)
    assert logistic_flow(0.0, 3.0) == 0.0 and logistic_flow(1.0, 3.0) == 1.0


def test_p1_norm_exact_for_linear_profiles():
    g = coated_grid(1.0, 0.1, 10, 3)
    vals = (2.0 + 3.0 * g.nodes)[None, :]
    # int_0^1.1 (2 + 3 r)^2 r^2 dr
    R = 1.1
    exact = 4 * R**3 / 3 + 12 * R**4 / 4 + 9 * R**5 / 5
    assert p1_norm_squared(g, vals) == pytest.approx(exact, rel=1e-14)
