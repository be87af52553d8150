import math

import numpy as np
import pytest
from scipy.linalg import eigh
from hypothesis import given, settings
from hypothesis import strategies as st

from coatfkpp.coated import CoatingSpec, coated_operators
from coatfkpp.effective import EbcKind, effective_operators
from coatfkpp.eigen import (EigenConvergenceError, Tridiagonal, inverse_iteration, linearized_eigen_at_steady,
                            mode_pencil, principal_eigen_coated, principal_eigen_effective, rayleigh_quotient)
from coatfkpp.fields import ModalField, bulk_restriction, weighted_l2_norm
from coatfkpp.surface import build_surface

SP1 = build_surface("sphere", 1.0, 4)


def check_pair(pair, ops):
    lam = pair.eigenvalue
    assert pair.residual <= 1e-10 * abs(lam) + 1e-12
    assert weighted_l2_norm(pair.field) == pytest.approx(1.0, abs=1e-12)
    assert float(ops.mass_norm_squared(pair.field.values)[pair.mode]) == pytest.approx(1.0, abs=1e-4)
    x = pair.field.values[pair.mode]
    free = ~ops.fixed[pair.mode]
    assert np.all(x[free] > 0)


def test_tridiagonal_helpers():
    A = Tridiagonal.symmetric(np.array([2.0, 2.0, 2.0]), np.array([-1.0, -1.0]))
    x = np.array([1.0, 2.0, 3.0])
    dense = np.diag([2.0] * 3) + np.diag([-1.0] * 2, 1) + np.diag([-1.0] * 2, -1)
    np.testing.assert_allclose(A @ x, dense @ x)
    np.testing.assert_allclose(A.solve(dense @ x), x)
    np.testing.assert_allclose((A + A.scaled(2.0)) @ x, 3 * dense @ x)


def test_inverse_iteration_against_dense():
    n = 40
    A = Tridiagonal.symmetric(np.full(n, 2.0), np.full(n - 1, -1.0))
    M = Tridiagonal.symmetric(np.full(n, 1.0), np.zeros(n - 1))
    lam, x, res, _ = inverse_iteration(A, M)
    assert lam == pytest.approx(2 - 2 * math.cos(math.pi / (n + 1)), rel=1e-12)
    with pytest.raises(EigenConvergenceError):
        inverse_iteration(A, M, max_iter=1)


def test_isotropic_coated_ball():
    sp = build_surface("sphere", 0.9, 4)
    spec = CoatingSpec(1.0, 1.0, 1.0, 0.1)
    pair = principal_eigen_coated(spec, sp)
    assert pair.eigenvalue == pytest.approx(math.pi**2, rel=5e-4)
    ops = coated_operators(spec, sp)
    check_pair(pair, ops)
    assert rayleigh_quotient(pair.field, ops) == pytest.approx(pair.eigenvalue, rel=1e-10)


def test_below_bulk_dirichlet_eigenvalue():
    for spec in (CoatingSpec(1, 0.01, 1, 0.1), CoatingSpec(1, 1, 100, 0.05), CoatingSpec(1, 10, 0.1, 0.1)):
        assert principal_eigen_coated(spec, SP1, 128, 16).eigenvalue < math.pi**2


def test_thin_low_conductivity_band():
    ratios = []
    for d in (0.1, 0.05, 0.025, 0.0125):
        spec = CoatingSpec(1.0, d * d, 1.0, d)
        ratios.append(principal_eigen_coated(spec, SP1).eigenvalue / (spec.sigma / d))
    assert all(1.5 <= r <= 6.0 for r in ratios)
    assert ratios[-1] == pytest.approx(3.0, rel=0.1)
    assert np.all(np.diff(ratios) > 0)


def test_coating_mass_and_near_constant_eigenfunction():
    coat, dev = [], []
    vol = 4 * math.pi / 3
    for d in (0.1, 0.05, 0.025, 0.0125):
        pair = principal_eigen_coated(CoatingSpec(1.0, d * d, 1.0, d), SP1)
        coat.append(weighted_l2_norm(pair.field, "coating") ** 2)
        b = bulk_restriction(pair.field)
        shifted = b.values.copy()
        shifted[0] -= math.sqrt(SP1.surface_area) / math.sqrt(vol)
        dev.append(weighted_l2_norm(b.with_values(shifted)) ** 2)
        assert coat[-1] <= 10 * d
        assert dev[-1] <= 10 * (d + d * d)
    assert np.all(np.diff(coat) < 0) and np.all(np.diff(dev) < 0)


@pytest.mark.parametrize("ebc", [EbcKind.neumann(), EbcKind.dtn(1.0), EbcKind.ct_zeroflux()])
def test_zero_principal_eigenvalue(ebc):
    pair = principal_eigen_effective(ebc, 1.0, SP1)
    assert abs(pair.eigenvalue) <= 1e-8
    assert pair.second > 0.1
    phys = pair.field.values[0] * SP1.e0
    np.testing.assert_allclose(phys, 1 / math.sqrt(4 * math.pi / 3), rtol=1e-10)
    assert pair.mode == 0


@pytest.mark.parametrize("ebc", [EbcKind.robin(1.0), EbcKind.dtn(1.0, 1.0), EbcKind.ct_robin(1.0)])
def test_positive_principal_eigenvalue(ebc):
    # all three act as Robin(1) on the radial mode; sin(kr)/r then needs cos k = 0
    pair = principal_eigen_effective(ebc, 1.0, SP1)
    assert pair.eigenvalue == pytest.approx(math.pi**2 / 4, rel=1e-4)
    check_pair(pair, effective_operators(ebc, 1.0, SP1))


def test_dirichlet_ball():
    pair = principal_eigen_effective(EbcKind.dirichlet(), 2.0, SP1)
    assert pair.eigenvalue == pytest.approx(2 * math.pi**2, rel=1e-4)


def test_rayleigh_quotients():
    ops = effective_operators(EbcKind.neumann(), 1.0, SP1, 64)
    rng = np.random.default_rng(1)
    f = ModalField(rng.standard_normal(ops.diag.shape), ops.grid, SP1)
    assert rayleigh_quotient(f, ops) >= 0
    with pytest.raises(ValueError):
        rayleigh_quotient(f.with_values(np.zeros_like(f.values)), ops)
    with pytest.raises(ValueError):
        rayleigh_quotient(f.with_values(np.zeros((2, 3))), ops)


_SPEC = CoatingSpec(1.0, 0.05, 5.0, 0.1)
_OPS = coated_operators(_SPEC, SP1, 64, 8)
_LAM = principal_eigen_coated(_SPEC, SP1, 64, 8).eigenvalue


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_random_fields_bound_principal_eigenvalue(seed):
    rng = np.random.default_rng(seed)
    v = _OPS.complete(rng.standard_normal(_OPS.diag.shape))
    q = rayleigh_quotient(ModalField(v, _OPS.grid, SP1), _OPS)
    assert q >= _LAM - 1e-12 * _LAM


def test_second_eigenvalue_via_deflation_matches_dense():
    ops = effective_operators(EbcKind.robin(1.0), 1.0, SP1, 64)
    free, K, M = mode_pencil(ops, 0)
    Kd = np.diag(K.diag) + np.diag(K.sup, 1) + np.diag(K.sub, -1)
    Md = np.diag(M.diag) + np.diag(M.sup, 1) + np.diag(M.sub, -1)
    ref = eigh(Kd, Md, eigvals_only=True)[:2]
    lam, x, _, _ = inverse_iteration(K, M, 1.0)
    lam2 = inverse_iteration(K, M, 1.0, x0=np.linspace(1, -1, x.size), deflate=[x])[0]
    assert lam == pytest.approx(ref[0], rel=1e-10)
    assert lam2 == pytest.approx(ref[1], rel=1e-10)


def test_linearized_shift_identities():
    spec = CoatingSpec(1.0, 1.0, 1.0, 0.1)
    ops = coated_operators(spec, SP1, 64, 8)
    lam = principal_eigen_coated(spec, SP1, 64, 8).eigenvalue
    zero = ModalField(np.zeros(ops.diag.shape), ops.grid, SP1)
    assert linearized_eigen_at_steady(zero, ops).eigenvalue == pytest.approx(lam - 1, rel=1e-10)
    eps = 1e-4
    shifted = zero.values.copy()
    shifted[0] = eps / SP1.e0
    eta = linearized_eigen_at_steady(zero.with_values(shifted), ops).eigenvalue
    assert eta == pytest.approx(lam - 1 + eps, rel=1e-10)
    with pytest.raises(ValueError):
        linearized_eigen_at_steady(ModalField(np.zeros((5, 3)), ops.grid, SP1), ops)
