"""Modal radial fields, initial-data presets and norms."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .radial import RadialGrid, p1_norm_squared
from .surface import SurfaceSpectrum, forward_transform, inverse_transform


@dataclass(frozen=True)
class ModalField:
    """Values ``u_l(rho_j)`` of one field at time ``t``.

    ``values`` has shape (n_modes, n_nodes).  The grid may include the
    coating (``grid.iface < n_nodes - 1``) or be bulk-only.
    """

    values: np.ndarray
    grid: RadialGrid
    spectrum: SurfaceSpectrum
    t: float = 0.0

    def nodal(self) -> np.ndarray:
        """Physical values on (surface quadrature nodes) x (radial nodes)."""
        return inverse_transform(self.spectrum, self.values)

    def with_values(self, values, t=None) -> "ModalField":
        return replace(self, values=values, t=self.t if t is None else t)

    @property
    def n_bulk(self) -> int:
        return self.grid.iface + 1


def parse_preset(name: str):
    """Turn a named initial condition into ``f(rho_over_R1, x)``.

    ``x`` is ``cos(phi)`` on the sphere and ``cos(theta)`` on the circle.
    Presets: ``constant:<c>``, ``bump``, ``mode1:<a>,<b>`` for
    ``a + b (rho/R1) cos(phi)``.
    """
    head, _, arg = name.partition(":")
    if head == "constant":
        c = float(arg)
        return lambda s, x: np.full(np.broadcast(s, x).shape, c)
    if head == "bump":
        return lambda s, x: np.exp(-4.0 * s**2) * (2.0 + x) / 3.0
    if head == "mode1":
        a, b = (float(v) for v in arg.split(","))
        return lambda s, x: a + b * s * x
    raise ValueError(f"unknown initial-condition preset {name!r}")


def surface_cosine(spectrum: SurfaceSpectrum) -> np.ndarray:
    if spectrum.kind == "sphere":
        return np.asarray(spectrum.nodes)
    return np.cos(spectrum.nodes)


def initial_field(u0, grid: RadialGrid, spectrum: SurfaceSpectrum) -> tuple[ModalField, float]:
    """Sample ``u0`` and return ``(field, sup|u0|)`` before any constraint.

    ``u0`` may be a scalar, a preset name, a callable ``f(rho/R1, x)``,
    nodal samples of shape (n_surface_nodes, n_radial_nodes) or a
    :class:`ModalField` on the same grid.
    """
    if isinstance(u0, ModalField):
        if u0.values.shape != (spectrum.n_modes, grid.n_nodes):
            raise ValueError("initial field does not match the solver grid")
        return u0.with_values(u0.values.copy(), t=0.0), float(np.max(np.abs(u0.nodal())))
    if isinstance(u0, str):
        u0 = parse_preset(u0)
    if callable(u0):
        s = grid.nodes[None, :] / grid.R1
        x = surface_cosine(spectrum)[:, None]
        nodal = np.broadcast_to(u0(s, x), (spectrum.n_nodes, grid.n_nodes)).astype(float)
    elif np.ndim(u0) == 0:
        nodal = np.full((spectrum.n_nodes, grid.n_nodes), float(u0))
    else:
        nodal = np.asarray(u0, dtype=float)
        if nodal.shape != (spectrum.n_nodes, grid.n_nodes):
            raise ValueError(f"nodal initial data must have shape {(spectrum.n_nodes, grid.n_nodes)}")
    if np.any(nodal < 0):
        raise ValueError("initial data must be non-negative")
    return ModalField(forward_transform(spectrum, nodal), grid, spectrum, 0.0), float(np.max(np.abs(nodal)))


def bulk_restriction(state: ModalField) -> ModalField:
    """Drop the coating nodes, keeping the trace at ``R1``."""
    n = state.n_bulk
    return ModalField(state.values[:, :n].copy(), state.grid.bulk(), state.spectrum, state.t)


def weighted_l2_norm(state: ModalField, region: str = "all") -> float:
    """``L2`` norm over bulk, coating or all of the domain.

    The radial profile of each mode is integrated as its piecewise-linear
    interpolant against the exact volume weight, so constants and
    linear-in-``rho`` profiles are integrated exactly.
    """
    grid = state.grid
    if region == "coating" and not grid.has_coating:
        return 0.0
    return float(np.sqrt(p1_norm_squared(grid, state.values, grid.region_mask(region))))


def difference_norm(a: ModalField, b: ModalField, region: str = "bulk") -> float:
    """``||a - b||`` over a common region; fields may live on different grids.

    Only the bulk region is shared between a coated and a bulk-only field.
    """
    if region != "bulk":
        if a.values.shape != b.values.shape:
            raise ValueError("fields on different grids can only be compared on the bulk")
        return weighted_l2_norm(a.with_values(a.values - b.values), region)
    ra, rb = bulk_restriction(a), bulk_restriction(b)
    if ra.values.shape != rb.values.shape or not np.array_equal(ra.grid.nodes, rb.grid.nodes):
        raise ValueError("bulk grids differ")
    return weighted_l2_norm(ra.with_values(ra.values - rb.values), "all")


def volume_integral(state: ModalField, region: str = "all") -> float:
    """``int u dx`` over a region through the constant surface mode."""
    grid = state.grid
    x = grid.nodes
    mask = grid.region_mask(region)
    gx, gw = np.polynomial.legendre.leggauss(3)
    a, b = x[:-1][mask], x[1:][mask]
    half = 0.5 * (b - a)
    ua, ub = state.values[0, :-1][mask], state.values[0, 1:][mask]
    total = 0.0
    for xi, wi in zip(gx, gw):
        t = 0.5 * (1.0 + xi)
        total += np.sum(wi * half * grid.weight(a + half * (1.0 + xi)) * (ua * (1 - t) + ub * t))
    return float(total * np.sqrt(state.spectrum.surface_area))
