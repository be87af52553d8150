"""Strang-split time stepping for ``u_t = div(A grad u) + f(u)``."""
from __future__ import annotations

import numpy as np

from .fields import ModalField
from .radial import ModeOperators, ThetaStepper, logistic_flow
from .surface import ParameterDomainError, SurfaceSpectrum

REACTIONS = ("logistic", "off")
TOL_MP = 1e-8


class MaximumPrincipleError(RuntimeError):
    """A sampled state left ``[0, max(1, ||u0||_inf)]`` by more than the tolerance."""


class SplitStepper:
    """Half logistic step, theta-scheme diffusion, half logistic step.

    The logistic substeps act pointwise on the surface quadrature nodes
    with the exact flow ``u e^tau / (1 - u + u e^tau)``; the diffusion
    substep is one tridiagonal solve per surface mode.
    """

    def __init__(self, ops: ModeOperators, spectrum: SurfaceSpectrum, dt: float,
                 theta: float = 1.0, reaction: str = "logistic"):
        if reaction not in REACTIONS:
            raise ParameterDomainError(f"reaction must be one of {REACTIONS}, got {reaction!r}")
        if ops.n_modes != spectrum.n_modes:
            raise ValueError("operator and spectrum disagree on the number of modes")
        self.ops, self.spectrum = ops, spectrum
        self.dt, self.theta, self.reaction = float(dt), float(theta), reaction
        self.diffuse = ThetaStepper(ops, dt, theta)
        self._synth = np.ascontiguousarray(spectrum.basis)
        self._analysis = np.ascontiguousarray((spectrum.basis * spectrum.weights[:, None]).T)

    def _react(self, u, tau):
        return self._analysis @ logistic_flow(self._synth @ u, tau)

    def advance(self, u: np.ndarray) -> np.ndarray:
        if self.reaction == "off":
            return self.diffuse(u)
        half = 0.5 * self.dt
        u = self._react(u, half)
        u = self.diffuse(u)
        return self.ops.complete(self._react(u, half))

    def step(self, state: ModalField) -> ModalField:
        return state.with_values(self.advance(state.values), t=state.t + self.dt)

    def run(self, state: ModalField, T: float, sample_times=None, bound: float | None = None,
            tol: float = TOL_MP, callback=None) -> list[ModalField]:
        """March to ``T`` and return the states at ``sample_times``.

        Sample times are snapped to the nearest multiple of ``dt``.  If
        ``bound`` is given every sampled state is checked against
        ``[-tol, bound + tol]`` on the quadrature nodes.
        """
        if not T > 0:
            raise ParameterDomainError("final time must be positive")
        n_steps = int(round(T / self.dt))
        if sample_times is None:
            sample_times = [0.0, n_steps * self.dt]
        idx = sorted({int(round(t / self.dt)) for t in sample_times})
        if idx[0] < 0 or idx[-1] > n_steps:
            raise ParameterDomainError("sample times must lie in [0, T]")
        wanted = set(idx)
        u = self.ops.complete(state.values.copy())
        out = []

        def record(n, u):
            s = state.with_values(u.copy(), t=n * self.dt)
            if bound is not None:
                check_bounds(s, bound, tol)
            if callback is not None:
                callback(s)
            out.append(s)

        if 0 in wanted:
            record(0, u)
        for n in range(1, idx[-1] + 1):
            u = self.advance(u)
            if n in wanted:
                record(n, u)
            if not np.all(np.isfinite(u)):
                raise FloatingPointError(f"non-finite values at step {n}")
        return out


def check_bounds(state: ModalField, bound: float, tol: float = TOL_MP) -> None:
    vals = state.nodal()
    lo, hi = float(vals.min()), float(vals.max())
    if lo < -tol or hi > bound + tol:
        raise MaximumPrincipleError(
            f"state at t={state.t:g} has range [{lo:.3e}, {hi:.6g}], allowed [0, {bound:g}] +/- {tol:g}")


class ModalSolver:
    """Shared driver: subclasses build ``self.ops`` on ``self.grid``."""

    ops: ModeOperators

    def __init__(self, spectrum: SurfaceSpectrum, dt: float = 1e-3, theta: float = 1.0,
                 reaction: str = "logistic"):
        self.spectrum = spectrum
        self.dt, self.theta, self.reaction = float(dt), float(theta), reaction
        self.stepper = SplitStepper(self.ops, spectrum, dt, theta, reaction)

    @property
    def grid(self):
        return self.ops.grid

    def initial(self, u0) -> tuple[ModalField, float]:
        """Sampled initial state and the bound ``max(1, ||u0||_inf)``."""
        from .fields import bulk_restriction, initial_field

        if isinstance(u0, ModalField) and u0.grid.n_nodes > self.grid.n_nodes:
            u0 = bulk_restriction(u0)
        field, sup = initial_field(u0, self.grid, self.spectrum)
        return field.with_values(self.ops.complete(field.values)), max(1.0, sup)

    def step(self, state: ModalField) -> ModalField:
        return self.stepper.step(state)

    def solve(self, u0, T: float, sample_times=None, check: bool = True,
              tol: float = TOL_MP, callback=None) -> list[ModalField]:
        """Trajectory at ``sample_times`` (default ``[0, T]``).

        With ``check`` every sampled state is tested against the
        maximum-principle bound and :class:`MaximumPrincipleError` is raised
        on violation.
        """
        state, bound = self.initial(u0)
        return self.stepper.run(state, T, sample_times, bound if check else None, tol, callback)
