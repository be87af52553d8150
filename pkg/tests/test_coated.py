import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coatfkpp.coated import CoatedSolver, CoatingSpec, single_domain_operators
from coatfkpp.eigen import principal_eigen_coated
from coatfkpp.evolution import MaximumPrincipleError, SplitStepper, check_bounds
from coatfkpp.fields import ModalField, weighted_l2_norm
from coatfkpp.surface import ParameterDomainError, build_surface

from .oracles import ball_heat_series

ISO = CoatingSpec(1.0, 1.0, 1.0, 0.1)


def compatible(R):
    return lambda s, x: (1 - s**2 / R**2) * (0.5 + 0.3 * s * x)


def test_spec_validation():
    for bad in [(0.0, 1, 1, 0.1), (1, -1, 1, 0.1), (1, 1, np.inf, 0.1), (1, 1, 1, 0.0)]:
        with pytest.raises(ParameterDomainError):
            CoatingSpec(*bad)
    with pytest.raises(ParameterDomainError):
        CoatedSolver(CoatingSpec(1, 1, 1, 0.6), build_surface("sphere", 1.0, 2))


def isotropic_series_error(L=8, Nb=256, Nc=32):
    """Bulk-plus-coating L2 error against the ball eigen-expansion at t = 0.1."""
    sp = build_surface("sphere", 1.0, L)
    Rout = 1.1
    solver = CoatedSolver(ISO, sp, Nb, Nc, dt=1e-4, theta=0.5, reaction="off")
    u = solver.solve(compatible(Rout), 0.1)[-1]
    rho = solver.grid.nodes
    ref = np.zeros_like(u.values)
    ref[0] = np.sqrt(4 * np.pi) * ball_heat_series(lambda r: 0.5 * (1 - r**2 / Rout**2), 0, Rout, 1.0, 0.1, rho)
    ref[1] = np.sqrt(4 * np.pi / 3) * ball_heat_series(lambda r: 0.3 * r * (1 - r**2 / Rout**2), 1, Rout, 1.0,
                                                       0.1, rho)
    return weighted_l2_norm(u.with_values(u.values - ref))


def test_isotropic_series_oracle():
    assert isotropic_series_error() <= 1e-6


def test_zero_stays_zero():
    sp = build_surface("sphere", 1.0, 4)
    for s in CoatedSolver(CoatingSpec(1, 0.01, 10, 0.05), sp, 32, 8).solve(0.0, 0.2, [0, 0.1, 0.2]):
        assert np.all(s.values == 0.0)


def test_max_principle_constant_half():
    sp = build_surface("sphere", 1.0, 8)
    states = CoatedSolver(ISO, sp, 64, 8).solve("constant:0.5", 2.0, np.linspace(0, 2, 21))
    for s in states:
        v = s.nodal()
        assert v.min() >= -1e-8 and v.max() <= 1 + 1e-8


def test_max_principle_violation_reported():
    sp = build_surface("sphere", 1.0, 2)
    solver = CoatedSolver(ISO, sp, 16, 4)
    state, _ = solver.initial(0.5)
    with pytest.raises(MaximumPrincipleError):
        check_bounds(state, 0.4)
    with pytest.raises(MaximumPrincipleError):
        solver.stepper.run(state, 0.01, bound=0.3)


def test_radial_symmetry_preserved():
    sp = build_surface("sphere", 2.0, 8)
    solver = CoatedSolver(CoatingSpec(1.0, 0.05, 20.0, 0.1), sp, 64, 8)
    for s in solver.solve(lambda s, x: np.exp(-4 * s**2) + 0 * x, 1.0, [0.5, 1.0]):
        assert np.max(np.abs(s.values[1:])) <= 1e-12


@settings(max_examples=8, deadline=None)
@given(a=st.floats(0.0, 0.9), b=st.floats(0.0, 0.5), gap=st.floats(0.0, 0.5))
def test_comparison(a, b, gap):
    sp = build_surface("sphere", 1.0, 4)
    solver = CoatedSolver(CoatingSpec(1.0, 0.1, 5.0, 0.1), sp, 32, 8)
    lo = solver.solve(lambda s, x: a + b * s * (1 + x) / 2, 0.3, [0.1, 0.3])
    hi = solver.solve(lambda s, x: a + b * s * (1 + x) / 2 + gap * (1 - s**2 / 1.21), 0.3, [0.1, 0.3])
    for u, v in zip(lo, hi):
        assert np.all(u.nodal() <= v.nodal() + 1e-8)


@pytest.mark.parametrize("theta", [1.0, 0.5])
def test_theta_amplitude_factor(theta):
    sp = build_surface("sphere", 1.0, 2)
    spec = CoatingSpec(1.0, 0.2, 3.0, 0.1)
    pair = principal_eigen_coated(spec, sp, 128, 16)
    dt, lam = 1e-2, pair.eigenvalue
    solver = CoatedSolver(spec, sp, 128, 16, dt=dt, theta=theta, reaction="off")
    out = solver.stepper.advance(pair.field.values)
    factor = (1 - (1 - theta) * dt * lam) / (1 + theta * dt * lam)
    x = pair.field.values[0, 1:-1]
    assert np.max(np.abs(out[0, 1:-1] - factor * x)) <= 1e-10 * np.max(np.abs(x))


def test_spectral_decay_bound_and_monotone_linear_decay():
    sp = build_surface("sphere", 1.0, 8)
    spec = CoatingSpec(1.0, 0.1, 2.0, 0.1)
    lam = principal_eigen_coated(spec, sp, 256, 32).eigenvalue
    solver = CoatedSolver(spec, sp, 256, 32, dt=1e-3, theta=0.5, reaction="off")
    times = np.linspace(0, 0.5, 26)
    states = solver.solve(compatible(1.1), 0.5, times)
    n = np.array([weighted_l2_norm(s) for s in states])
    t = np.array([s.t for s in states])
    assert np.all(n <= np.exp(-lam * t) * n[0] * (1 + 1e-3))
    assert np.all(np.diff(n) <= 0)


def test_isotropic_consistency_with_single_domain():
    sp = build_surface("sphere", 1.0, 6)
    coated = CoatedSolver(CoatingSpec(1.2, 1.2, 1.2, 0.1), sp, 64, 8, dt=1e-3)
    single = single_domain_operators(coated.grid.nodes, 1.0, sp.eigenvalues, 1.2)
    ref = SplitStepper(single, sp, 1e-3, 1.0, "logistic")
    state, _ = coated.initial("mode1:0.5,0.3")
    u, v = state.values, state.values
    for _ in range(5):
        u, v = coated.stepper.advance(u), ref.advance(v)
        assert np.max(np.abs(u - v)) <= 1e-10


def test_solve_sampling_and_errors():
    sp = build_surface("sphere", 1.0, 2)
    solver = CoatedSolver(ISO, sp, 16, 4, dt=1e-2)
    out = solver.solve(0.3, 0.1, [0.0, 0.05, 0.1])
    assert [round(s.t, 12) for s in out] == [0.0, 0.05, 0.1]
    with pytest.raises(ParameterDomainError):
        solver.solve(0.3, -1.0)
    with pytest.raises(ParameterDomainError):
        solver.solve(0.3, 0.1, [0.2])
    with pytest.raises(ParameterDomainError):
        CoatedSolver(ISO, sp, 16, 4, reaction="cubic")
    assert isinstance(out[0], ModalField)
