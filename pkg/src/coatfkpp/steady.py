"""Positive steady states of the coated and effective Fisher-KPP problems.

Existence is decided by the principal eigenvalue (a positive steady state
exists iff it is below 1).  The state is found by marching from a
supersolution and then polishing the radial discrete system
``K U = M U(1 - U)`` with Newton's method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coated import CoatedSolver, CoatingSpec
from .effective import EbcKind, EffectiveSolver
from .eigen import EigenPair, FluxTridiagonal, mode_pencil, principal_eigen_coated, principal_eigen_effective
from .evolution import ModalSolver
from .fields import ModalField, bulk_restriction, difference_norm, weighted_l2_norm
from .radial import ModeOperators, solve_tridiagonal
from .surface import SurfaceSpectrum

BAND = 1e-3
T_PROBE = 200.0
DT_PROBE = 1e-2
T_PROBE_MAX = 5000.0
NEWTON_TOL = 1e-12
DECAY_TOL = 1e-6


class SteadyStateError(RuntimeError):
    """Newton failed, or the march contradicts the eigenvalue criterion."""


@dataclass(frozen=True)
class SteadyState:
    """Outcome of a steady-state search.

    ``exists`` is ``None`` inside the indeterminate band around the
    threshold.  ``march_norm`` is ``||u(T_probe)||`` of the time march and
    ``higher_modes`` the largest nonradial coefficient it produced.
    """

    exists: bool | None
    profile: ModalField | None
    residual: float
    eigenvalue: float
    march_norm: float
    t_probe: float
    higher_modes: float
    newton_iterations: int = 0


def newton_radial(ops: ModeOperators, u, tol: float = NEWTON_TOL, max_iter: int = 50):
    """Solve ``K u = M u(1-u)`` on the free radial nodes from the guess ``u``.

    ``u`` holds physical values on the free nodes of the constant mode.
    Returns ``(u, residual, iterations)``.
    """
    free, K, M = mode_pencil(ops, 0)
    u = np.array(u, dtype=float)
    for it in range(1, max_iter + 1):
        F = K @ u - M @ (u * (1.0 - u))
        q = 1.0 - 2.0 * u
        sub = K.sub - M.sub * q[:-1]
        sup = K.sup - M.sup * q[1:]
        diag = K.diag - M.diag * q
        du = solve_tridiagonal(sub, diag, sup, -F)
        u += du
        if not np.all(np.isfinite(u)):
            break
        if np.max(np.abs(du)) <= tol:
            return u, _residual(K, M, u), it
    raise SteadyStateError(f"Newton iteration did not converge in {max_iter} steps")


def _residual(K: FluxTridiagonal, M, u) -> float:
    F = K @ u - M @ (u * (1.0 - u))
    return float(np.sqrt(max(F @ M.solve(F), 0.0)))


def steady_residual(state: ModalField, ops: ModeOperators) -> float:
    """Discrete ``L2`` norm of ``-div(A grad U) - U(1-U)`` for a radial state."""
    free, K, M = mode_pencil(ops, 0)
    u = state.values[0, free] * state.spectrum.e0
    return _residual(K, M, u)


def _probe_horizon(eigenvalue: float, volume: float, sup: float) -> float:
    if eigenvalue <= 1.0 + BAND:
        return T_PROBE
    need = 1.25 * math.log(sup * math.sqrt(volume) / DECAY_TOL) / (eigenvalue - 1.0)
    return float(min(max(T_PROBE, need), T_PROBE_MAX))


def find_steady(solver: ModalSolver, eig: EigenPair, u_init=1.0, volume: float | None = None) -> SteadyState:
    """March ``solver`` from ``u_init`` and polish; ``solver`` must use the logistic reaction."""
    if solver.reaction != "logistic":
        raise ValueError("steady states need the logistic reaction")
    lam = eig.eigenvalue
    if lam < 1.0 - BAND:
        exists = True
    elif lam > 1.0 + BAND:
        exists = False
    else:
        exists = None
    state, bound = solver.initial(u_init)
    volume = volume if volume is not None else _volume(solver)
    T = _probe_horizon(lam, volume, bound)
    end = solver.stepper.run(state, T, [T], bound=bound)[-1]
    march_norm = weighted_l2_norm(end)
    higher = float(np.max(np.abs(end.values[1:]))) if end.values.shape[0] > 1 else 0.0

    ops = solver.ops
    e0 = solver.spectrum.e0
    free = np.flatnonzero(~ops.fixed[0])
    if exists is False:
        return SteadyState(False, None, march_norm, lam, march_norm, T, higher)
    u, res, its = newton_radial(ops, end.values[0, free] * e0)
    positive = bool(np.all(u > 0))
    if exists and not positive:
        raise SteadyStateError("Newton converged to a non-positive state although a positive one exists")
    values = np.zeros_like(end.values)
    values[0, free] = u / e0
    values[0] = ops.complete(values)[0]
    profile = ModalField(values, end.grid, end.spectrum, 0.0)
    if exists is None and not positive:
        profile = None
    return SteadyState(exists, profile, res, lam, march_norm, T, higher, its)


def _volume(solver: ModalSolver) -> float:
    g, sp = solver.grid, solver.spectrum
    return sp.surface_area * g.outer**g.dim / (g.dim * g.R1 ** (g.dim - 1))


def steady_coated(spec: CoatingSpec, spectrum: SurfaceSpectrum, Nb: int = 256, Nc: int = 32,
                  u_init=1.0, dt: float = DT_PROBE, eig: EigenPair | None = None) -> SteadyState:
    """Positive steady state ``U`` of the coated problem (if it exists)."""
    eig = eig or principal_eigen_coated(spec, spectrum, Nb, Nc)
    solver = CoatedSolver(spec, spectrum, Nb, Nc, dt=dt, theta=1.0)
    return find_steady(solver, eig, u_init)


def steady_effective(ebc: EbcKind, k: float, spectrum: SurfaceSpectrum, Nb: int = 256,
                     u_init=1.0, dt: float = DT_PROBE, eig: EigenPair | None = None) -> SteadyState:
    """Positive steady state ``V`` of an effective problem (if it exists)."""
    eig = eig or principal_eigen_effective(ebc, k, spectrum, Nb, second=False)
    solver = EffectiveSolver(ebc, k, spectrum, Nb, dt=dt, theta=1.0)
    return find_steady(solver, eig, u_init)


def steady_gap(U: SteadyState, V: SteadyState) -> float:
    """``||U - V||`` on the bulk; an absent state counts as zero."""
    if U.profile is None and V.profile is None:
        return 0.0
    if U.profile is None:
        return weighted_l2_norm(V.profile, "bulk")
    if V.profile is None:
        return weighted_l2_norm(bulk_restriction(U.profile))
    return difference_norm(U.profile, V.profile)
