"""Full coated problem: ball plus anisotropic shell, zero data outside."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import ModalSolver
from .radial import ModeOperators, RadialGrid, assemble, coated_grid
from .surface import ParameterDomainError, SurfaceSpectrum


@dataclass(frozen=True)
class CoatingSpec:
    """Bulk diffusivity ``k``; coating normal/tangent conductivities and thickness."""

    k: float
    sigma: float
    mu: float
    delta: float

    def __post_init__(self):
        for name in ("k", "sigma", "mu", "delta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterDomainError(f"{name} must be finite and positive, got {v}")

    def check_radius(self, R1: float) -> None:
        if not self.delta < R1 / 2:
            raise ParameterDomainError(f"coating thickness {self.delta} must be below R1/2 = {R1 / 2}")


def coated_operators(spec: CoatingSpec, spectrum: SurfaceSpectrum, Nb: int = 256, Nc: int = 32,
                     mass: str = "compact") -> ModeOperators:
    """All-mode operators with the outer node held at zero."""
    spec.check_radius(spectrum.R1)
    grid = coated_grid(spectrum.R1, spec.delta, Nb, Nc, spectrum.dim)
    ops = assemble(grid, spectrum.eigenvalues, spec.k, spec.k, spec.sigma, spec.mu, mass)
    ops.fixed[:, -1] = True
    return ops


def assemble_mode_operator(spec: CoatingSpec, spectrum: SurfaceSpectrum, l: int, Nb: int = 256,
                           Nc: int = 32, mass: str = "compact") -> ModeOperators:
    """Operators of a single surface mode ``l`` (a one-mode :class:`ModeOperators`)."""
    if not 0 <= l < spectrum.n_modes:
        raise ParameterDomainError(f"mode index {l} outside 0..{spectrum.n_modes - 1}")
    spec.check_radius(spectrum.R1)
    grid = coated_grid(spectrum.R1, spec.delta, Nb, Nc, spectrum.dim)
    ops = assemble(grid, spectrum.eigenvalues[l : l + 1], spec.k, spec.k, spec.sigma, spec.mu, mass)
    ops.fixed[:, -1] = True
    return ops


def single_domain_operators(nodes, R1: float, eigenvalues, k: float, dim: int = 3,
                            mass: str = "compact") -> ModeOperators:
    """Isotropic operators ``-k Laplacian`` on ``[0, nodes[-1]]`` with zero outer data."""
    nodes = np.asarray(nodes, dtype=float)
    grid = RadialGrid(nodes, float(R1), nodes.size - 1, dim)
    ops = assemble(grid, eigenvalues, k, k, mass=mass)
    ops.fixed[:, -1] = True
    return ops


class CoatedSolver(ModalSolver):
    """Time stepper for the coated problem.

    Parameters
    ----------
    spec : CoatingSpec
    spectrum : SurfaceSpectrum
    Nb, Nc : int
        Bulk and coating interval counts.
    dt, theta : float
        Time step and theta-scheme weight (1 is backward Euler).
    reaction : {"logistic", "off"}
    """

    def __init__(self, spec: CoatingSpec, spectrum: SurfaceSpectrum, Nb: int = 256, Nc: int = 32,
                 dt: float = 1e-3, theta: float = 1.0, reaction: str = "logistic",
                 mass: str = "compact"):
        self.spec, self.Nb, self.Nc = spec, Nb, Nc
        self.ops = coated_operators(spec, spectrum, Nb, Nc, mass)
        super().__init__(spectrum, dt, theta, reaction)

