"""Conservative radial discretization shared by all solvers.

A field is stored as modal coefficients ``u_l(rho_j)`` of orthonormal
surface eigenfunctions on ``Gamma`` (radius ``R1``).  With the weight
``w(rho) = (rho/R1)**(d-1)`` the volume integral of ``u**2`` is
``sum_l int u_l(rho)**2 w(rho) drho``.  For every mode the semi-discrete
system is ``M u' = -K u`` with symmetric tridiagonal ``M`` and ``K``.

In three dimensions the scheme is the standard three-point scheme for
``w = rho u`` written back in ``u``:

* face fluxes ``a_f rho_j rho_{j+1} (u_{j+1} - u_j) / h_f`` with ``a_f`` the
  normal conductivity (``k`` in the bulk, ``sigma`` in the coating), so the
  flux condition ``k u_rho(R1-) = sigma u_rho(R1+)`` holds by construction;
* tangential terms ``lam_l R1**2 int_cell b(rho) w(rho) / rho**2 drho`` with
  ``b = k`` in the bulk and ``mu`` in the coating;
* a compact (Numerov) mass, element blocks ``h/12 [[5 a^2, a b], [a b, 5 b^2]]``
  for nodes at radii ``a, b``, which makes the radial mode fourth-order
  accurate, or its row-sum lumping.

``w(0) = 0`` decouples the origin: node 0 is held for every mode and its
value is filled from node 1 for the constant surface mode.  Nodes held at
zero (outer Dirichlet data, Dirichlet-type boundary closures) are flagged
in a ``fixed`` mask and carry identity rows.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .surface import ParameterDomainError


def _moment(a, b, p):
    """``int_a^b rho**p drho`` elementwise (``p`` integer >= -1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if p == -1:
        with np.errstate(divide="ignore"):
            return np.log(b) - np.log(a)
    return (b ** (p + 1) - a ** (p + 1)) / (p + 1)


@dataclass(frozen=True)
class RadialGrid:
    """Radial nodes ``0 = rho_0 < ... < rho_N``; ``iface`` indexes ``rho = R1``."""

    nodes: np.ndarray
    R1: float
    iface: int
    dim: int = 3

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def outer(self) -> float:
        return float(self.nodes[-1])

    @property
    def has_coating(self) -> bool:
        return self.iface < self.n_nodes - 1

    @property
    def cell_bounds(self):
        x = self.nodes
        mid = 0.5 * (x[1:] + x[:-1])
        return np.concatenate([[x[0]], mid]), np.concatenate([mid, [x[-1]]])

    def weight(self, rho):
        return (np.asarray(rho, dtype=float) / self.R1) ** (self.dim - 1)

    def region_mask(self, region: str) -> np.ndarray:
        """Interval mask (length ``N``) selecting bulk, coating or all intervals."""
        idx = np.arange(self.n_nodes - 1)
        if region == "bulk":
            return idx < self.iface
        if region == "coating":
            return idx >= self.iface
        if region == "all":
            return np.ones_like(idx, dtype=bool)
        raise ValueError(f"unknown region {region!r}")

    def bulk(self) -> "RadialGrid":
        return RadialGrid(self.nodes[: self.iface + 1], self.R1, self.iface, self.dim)


def bulk_grid(R1: float, Nb: int, dim: int = 3) -> RadialGrid:
    if Nb < 2:
        raise ParameterDomainError("bulk grid needs at least two intervals")
    if not R1 > 0:
        raise ParameterDomainError("radius must be positive")
    return RadialGrid(np.linspace(0.0, R1, Nb + 1), float(R1), Nb, dim)


def coated_grid(R1: float, delta: float, Nb: int, Nc: int, dim: int = 3) -> RadialGrid:
    if not 0 < delta < R1 / 2:
        raise ParameterDomainError(f"coating thickness must lie in (0, R1/2), got {delta}")
    if Nb < 2 or Nc < 1:
        raise ParameterDomainError("grid needs Nb >= 2 bulk and Nc >= 1 coating intervals")
    bulk = np.linspace(0.0, R1, Nb + 1)
    coat = R1 + delta * np.arange(1, Nc + 1) / Nc
    return RadialGrid(np.concatenate([bulk, coat]), float(R1), Nb, dim)


def _tridiag_matvec(diag, off, u):
    out = diag * u
    out[..., :-1] += off * u[..., 1:]
    out[..., 1:] += off * u[..., :-1]
    return out


@dataclass
class ModeOperators:
    """Per-mode tridiagonal stiffness with a shared tridiagonal mass.

    ``diag`` and ``fixed`` have shape (n_modes, N); ``off`` has shape
    (n_modes, N - 1) and holds the symmetric sub/super diagonal.  The
    stiffness is a face Laplacian plus a diagonal ``potential`` (tangential
    and boundary terms), ``diag_j = -off_{j-1} - off_j + potential_j``;
    the potential is kept separately so ``K u`` can be evaluated from
    differences without cancellation.
    """

    grid: RadialGrid
    eigenvalues: np.ndarray
    mass_diag: np.ndarray
    mass_off: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    fixed: np.ndarray
    potential: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.diag.shape[0]

    def free(self, u):
        return np.where(self.fixed, 0.0, u)

    def matvec(self, u) -> np.ndarray:
        """``K u`` for every mode; fixed nodes are treated as zero."""
        return self.free(_tridiag_matvec(self.diag, self.off, self.free(u)))

    def massvec(self, u) -> np.ndarray:
        return self.free(_tridiag_matvec(self.mass_diag, self.mass_off, self.free(u)))

    def energy(self, u) -> np.ndarray:
        """Per-mode ``u^T K u`` over free nodes."""
        return np.einsum("mj,mj->m", self.free(u), self.matvec(u))

    def mass_norm_squared(self, u) -> np.ndarray:
        """Per-mode ``u^T M u`` over free nodes."""
        return np.einsum("mj,mj->m", self.free(u), self.massvec(u))

    def complete(self, u) -> np.ndarray:
        """Zero the held nodes and fill the decoupled origin."""
        u = self.free(u)
        const = self.eigenvalues == 0
        u[const, 0] = u[const, 1]
        return u

    def add_boundary_term(self, l: int, j: int, value: float) -> None:
        self.diag[l, j] += value
        self.potential[l, j] += value

    def mode(self, l: int):
        """Reduced tridiagonal data ``(free_idx, md, mo, kd, ko)`` of one mode."""
        free = self._free_block(l)
        inner = free[:-1]
        return free, self.mass_diag[free], self.mass_off[inner], self.diag[l, free], self.off[l, inner]

    def mode_flux_form(self, l: int):
        """``(faces, left, right, potential)`` of mode ``l`` on its free nodes.

        ``faces`` are the conductances between consecutive free nodes and
        ``left``/``right`` those linking the block to held neighbours.
        """
        free = self._free_block(l)
        cond = -self.off[l]
        left = cond[free[0] - 1] if free[0] > 0 else 0.0
        right = cond[free[-1]] if free[-1] < self.grid.n_nodes - 1 else 0.0
        return cond[free[:-1]], float(left), float(right), self.potential[l, free]

    def _free_block(self, l):
        free = np.flatnonzero(~self.fixed[l])
        if free.size > 1 and np.any(np.diff(free) != 1):
            raise ValueError("free nodes of a mode must be contiguous")
        return free


def assemble(grid: RadialGrid, eigenvalues, normal_bulk: float, tangent_bulk: float,
             normal_coat: float | None = None, tangent_coat: float | None = None,
             mass: str = "compact") -> ModeOperators:
    """Assemble ``K_l`` for ``-div(A grad u)`` restricted to each surface mode.

    No condition is imposed at the last node; callers add closures.
    """
    x = grid.nodes
    if np.any(np.diff(x) <= 0):
        raise ParameterDomainError("degenerate radial grid (repeated or unsorted nodes)")
    if grid.has_coating and (normal_coat is None or tangent_coat is None):
        raise ValueError("coated grid needs coating conductivities")
    if mass not in ("compact", "lumped"):
        raise ValueError(f"unknown mass kind {mass!r}")
    lam = np.asarray(eigenvalues, dtype=float)
    d, R1 = grid.dim, grid.R1
    nf = x.size - 1
    h = np.diff(x)
    scale = R1 ** (d - 1)
    gm = (x[:-1] * x[1:]) ** (0.5 * (d - 1))
    a = np.where(np.arange(nf) < grid.iface, normal_bulk,
                 normal_coat if normal_coat is not None else normal_bulk)
    S = a * gm / (h * scale)

    pa = x[:-1] ** (d - 1)
    pb = x[1:] ** (d - 1)
    md = np.zeros(x.size)
    md[:-1] += 5.0 * h * pa / 12.0
    md[1:] += 5.0 * h * pb / 12.0
    mo = h * gm / 12.0
    if mass == "lumped":
        md[:-1] += mo
        md[1:] += mo
        mo = np.zeros_like(mo)
    md /= scale
    mo /= scale

    lo, hi = grid.cell_bounds
    p = d - 3
    T = np.zeros(x.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        top = np.minimum(hi, R1) if grid.has_coating else hi
        m = top > lo
        T[m] += tangent_bulk * _moment(lo[m], top[m], p)
        if grid.has_coating:
            bot = np.maximum(lo, R1)
            mc = hi > bot
            T[mc] += tangent_coat * _moment(bot[mc], hi[mc], p)
    # the origin moment may diverge (d = 2) but that node is always held
    T[0] = 0.0
    T *= R1**2 / scale

    potential = lam[:, None] * T[None, :]
    diag = potential.copy()
    diag[:, :-1] += S
    diag[:, 1:] += S
    off = np.broadcast_to(-S, (lam.size, nf)).copy()
    fixed = np.zeros((lam.size, x.size), dtype=bool)
    fixed[:, 0] = True
    return ModeOperators(grid, lam, md, mo, diag, off, fixed, potential)


class ThetaStepper:
    """Implicit theta-scheme ``(M + theta dt K) u1 = (M - (1-theta) dt K) u0``.

    All modes are factorized once as one block-diagonal tridiagonal
    system (LAPACK ``gttrf``) and solved with a single ``gttrs`` per step.
    """

    def __init__(self, ops: ModeOperators, dt: float, theta: float = 1.0):
        if not dt > 0:
            raise ParameterDomainError("time step must be positive")
        if not 0.0 <= theta <= 1.0:
            raise ParameterDomainError("theta must lie in [0, 1]")
        self.ops, self.dt, self.theta = ops, float(dt), float(theta)
        nm, n = ops.diag.shape
        fixed = ops.fixed
        d = ops.mass_diag[None, :] + theta * dt * ops.diag
        off = ops.mass_off[None, :] + theta * dt * ops.off
        if np.any((off > 0) & ~fixed[:, 1:] & ~fixed[:, :-1]):
            warnings.warn("theta * dt is below the compact-mass positivity threshold; "
                          "discrete maximum principle not guaranteed", RuntimeWarning, stacklevel=2)
        d = np.where(fixed, 1.0, d)
        up = np.where(fixed[:, :-1], 0.0, off)
        lo = np.where(fixed[:, 1:], 0.0, off)
        pad = np.zeros((nm, 1))
        up = np.concatenate([up, pad], axis=1).ravel()[:-1]
        lo = np.concatenate([lo, pad], axis=1).ravel()[:-1]
        dl, dd, du, du2, ipiv, info = lapack.dgttrf(lo, d.ravel(), up)
        if info != 0:
            raise np.linalg.LinAlgError(f"singular diffusion matrix (gttrf info={info}); operator mis-assembled")
        self._lu = (dl, dd, du, du2, ipiv)
        self._shape = (nm, n)

    def __call__(self, u):
        ops = self.ops
        rhs = ops.massvec(u)
        if self.theta < 1.0:
            rhs -= (1.0 - self.theta) * self.dt * ops.matvec(u)
        x, info = lapack.dgttrs(*self._lu, rhs.ravel())
        if info != 0:
            raise np.linalg.LinAlgError(f"tridiagonal solve failed (gttrs info={info})")
        return ops.complete(x.reshape(self._shape))


def solve_tridiagonal(sub, diag, sup, rhs):
    """Solve one tridiagonal system (LAPACK ``gtsv``)."""
    _, _, _, x, info = lapack.dgtsv(np.array(sub, float), np.array(diag, float),
                                    np.array(sup, float), np.array(rhs, float))
    if info != 0:
        raise np.linalg.LinAlgError(f"singular tridiagonal system (gtsv info={info})")
    return x


def logistic_flow(u, tau):
    """Exact flow of ``u' = u(1 - u)`` over time ``tau``."""
    e = np.exp(tau)
    return u * e / (1.0 - u + u * e)


def p1_norm_squared(grid: RadialGrid, values, intervals=None) -> float:
    """Exact integral of the squared piecewise-linear interpolant times ``w``.

    ``values`` has modes on axis 0 and nodes on axis 1; ``intervals`` is
    a boolean interval mask (defaults to all intervals).
    """
    values = np.atleast_2d(values)
    x = grid.nodes
    if intervals is None:
        intervals = np.ones(x.size - 1, dtype=bool)
    # three-point Gauss rule is exact for degree <= 5 (interpolant^2 * rho^2)
    gx, gw = np.polynomial.legendre.leggauss(3)
    a, b = x[:-1][intervals], x[1:][intervals]
    half = 0.5 * (b - a)
    ua = values[:, :-1][:, intervals]
    ub = values[:, 1:][:, intervals]
    total = 0.0
    for xi, wi in zip(gx, gw):
        t = 0.5 * (1.0 + xi)
        rho = a + half * (1.0 + xi)
        u = ua * (1.0 - t) + ub * t
        total += np.sum(wi * half * grid.weight(rho) * u**2)
    return float(total)
