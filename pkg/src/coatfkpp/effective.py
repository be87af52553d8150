"""Effective problems on the bare ball with the limiting boundary conditions.

The boundary law ``k dv/dn = c_l v`` is diagonal in the surface modes: it
adds ``-c_l`` to the last diagonal entry of mode ``l`` (the boundary flux of
the last control volume).  Dirichlet-type rows hold the trace at zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dtn import DtnOperator, build_dtn
from .evolution import ModalSolver
from .radial import ModeOperators, assemble, bulk_grid
from .surface import ParameterDomainError, SurfaceSpectrum

EBC_TAGS = ("neumann", "robin", "dirichlet", "dtn", "ct-zeroflux", "ct-robin")


@dataclass(frozen=True)
class EbcKind:
    """One effective boundary condition.

    ``tag`` is one of ``neumann``, ``robin`` (``alpha``), ``dirichlet``,
    ``dtn`` (``gamma`` and depth ``h``, possibly infinite), ``ct-zeroflux``
    (constant trace, zero total flux) and ``ct-robin`` (constant trace,
    total flux balanced by ``alpha``).
    """

    tag: str
    alpha: float | None = None
    gamma: float | None = None
    h: float | None = None

    def __post_init__(self):
        if self.tag not in EBC_TAGS:
            raise ParameterDomainError(f"unknown boundary condition {self.tag!r}")
        need = {"robin": ("alpha",), "ct-robin": ("alpha",), "dtn": ("gamma", "h")}.get(self.tag, ())
        for name in ("alpha", "gamma", "h"):
            v = getattr(self, name)
            if name in need:
                if v is None or not v > 0:
                    raise ParameterDomainError(f"{self.tag} needs {name} > 0, got {v}")
            elif v is not None:
                raise ParameterDomainError(f"{self.tag} takes no {name}")
        if self.tag != "dtn" and any(not math.isfinite(getattr(self, n)) for n in need):
            raise ParameterDomainError("parameters must be finite")

    @classmethod
    def neumann(cls):
        return cls("neumann")

    @classmethod
    def robin(cls, alpha: float):
        return cls("robin", alpha=alpha)

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet")

    @classmethod
    def dtn(cls, gamma: float, h: float = math.inf):
        return cls("dtn", gamma=gamma, h=h)

    @classmethod
    def ct_zeroflux(cls):
        return cls("ct-zeroflux")

    @classmethod
    def ct_robin(cls, alpha: float):
        return cls("ct-robin", alpha=alpha)

    @classmethod
    def from_config(cls, name: str, alpha=None, gamma=None) -> "EbcKind":
        """Parse the config names ``dtn-inf`` and ``dtn-finite`` (depth ``gamma/alpha``) too."""
        if name == "dtn-inf":
            return cls.dtn(gamma)
        if name == "dtn-finite":
            if alpha is None or gamma is None:
                raise ParameterDomainError("dtn-finite needs alpha and gamma")
            return cls.dtn(gamma, gamma / alpha)
        if name in ("robin", "ct-robin"):
            return cls(name, alpha=alpha)
        return cls(name)

    @property
    def label(self) -> str:
        if self.tag in ("robin", "ct-robin"):
            return f"{self.tag}(alpha={self.alpha:g})"
        if self.tag == "dtn":
            return f"dtn(gamma={self.gamma:g},h={self.h:g})"
        return self.tag

    @property
    def kills_constants(self) -> bool:
        """Whether a constant is a null vector of the boundary law."""
        return self.tag in ("neumann", "ct-zeroflux") or (self.tag == "dtn" and math.isinf(self.h))


@dataclass(frozen=True)
class BoundaryRow:
    """``dirichlet`` (trace held at 0) or ``flux`` meaning ``k dv/drho = coefficient * v``."""

    kind: str
    coefficient: float = 0.0


def boundary_closure(ebc: EbcKind, spectrum: SurfaceSpectrum, l: int,
                     dtn: DtnOperator | None = None) -> BoundaryRow:
    """Boundary row of mode ``l``."""
    if not 0 <= l < spectrum.n_modes:
        raise ParameterDomainError(f"mode index {l} outside 0..{spectrum.n_modes - 1}")
    if ebc.tag == "dtn":
        if dtn is None:
            raise ValueError("the DtN boundary law needs a DtN operator")
        if not dtn.spectrum.same_as(spectrum) or dtn.h != ebc.h:
            raise ValueError("DtN operator does not match the boundary law")
        return BoundaryRow("flux", float(ebc.gamma * dtn.multipliers[l]))
    constant = spectrum.eigenvalues[l] == 0
    if ebc.tag == "neumann":
        return BoundaryRow("flux", 0.0)
    if ebc.tag == "robin":
        return BoundaryRow("flux", -float(ebc.alpha))
    if ebc.tag == "dirichlet":
        return BoundaryRow("dirichlet")
    if not constant:
        return BoundaryRow("dirichlet")
    return BoundaryRow("flux", 0.0 if ebc.tag == "ct-zeroflux" else -float(ebc.alpha))


def effective_operators(ebc: EbcKind, k: float, spectrum: SurfaceSpectrum, Nb: int = 256,
                        mass: str = "compact") -> ModeOperators:
    if not k > 0:
        raise ParameterDomainError("bulk diffusivity must be positive")
    dtn = build_dtn(spectrum, ebc.h) if ebc.tag == "dtn" else None
    grid = bulk_grid(spectrum.R1, Nb, spectrum.dim)
    ops = assemble(grid, spectrum.eigenvalues, k, k, mass=mass)
    for l in range(spectrum.n_modes):
        row = boundary_closure(ebc, spectrum, l, dtn)
        if row.kind == "dirichlet":
            ops.fixed[l, -1] = True
        else:
            ops.add_boundary_term(l, -1, -row.coefficient)
    return ops


class EffectiveSolver(ModalSolver):
    """Time stepper for the bare ball under an effective boundary law."""

    def __init__(self, ebc: EbcKind, k: float, spectrum: SurfaceSpectrum, Nb: int = 256,
                 dt: float = 1e-3, theta: float = 1.0, reaction: str = "logistic",
                 mass: str = "compact"):
        self.ebc, self.k, self.Nb = ebc, float(k), Nb
        self.ops = effective_operators(ebc, k, spectrum, Nb, mass)
        super().__init__(spectrum, dt, theta, reaction)
