"""Principal eigenpairs of the coated and effective elliptic operators.

Each surface mode gives a tridiagonal pencil ``(K_l, M)``; eigenpairs are
found by inverse power iteration on ``K_l + s M`` (``s = 0`` for the
coated operator, ``s = 1`` where the eigenvalue may vanish) with one LAPACK
factorization per solve.  Norms and Rayleigh quotients use the scheme's
mass matrix, so ``||e||^2 = e^T M e`` is the discrete ``L2`` norm.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .coated import CoatingSpec, coated_operators
from .effective import EbcKind, effective_operators
from .fields import ModalField, weighted_l2_norm
from .radial import ModeOperators
from .surface import SurfaceSpectrum

MAX_ITER = 10_000
RQ_TOL = 1e-12


class EigenConvergenceError(RuntimeError):
    """Inverse iteration hit the iteration cap."""


class Tridiagonal:
    """``sub``/``diag``/``sup`` storage with a cached LU factorization."""

    def __init__(self, sub, diag, sup):
        self.sub = np.asarray(sub, dtype=float)
        self.diag = np.asarray(diag, dtype=float)
        self.sup = np.asarray(sup, dtype=float)
        self._lu = None

    @classmethod
    def symmetric(cls, diag, off):
        return cls(off, diag, off)

    def __matmul__(self, x):
        y = self.diag * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        return y

    def __add__(self, other: "Tridiagonal"):
        return Tridiagonal(self.sub + other.sub, self.diag + other.diag, self.sup + other.sup)

    def scaled(self, c: float):
        return Tridiagonal(c * self.sub, c * self.diag, c * self.sup)

    def solve(self, b):
        if self._lu is None:
            dl, d, du, du2, ipiv, info = lapack.dgttrf(self.sub, self.diag, self.sup)
            if info != 0:
                raise np.linalg.LinAlgError(f"singular shifted operator (gttrf info={info})")
            self._lu = (dl, d, du, du2, ipiv)
        x, info = lapack.dgttrs(*self._lu, b)
        if info != 0:
            raise np.linalg.LinAlgError(f"gttrs info={info}")
        return x


class FluxTridiagonal(Tridiagonal):
    """Symmetric stiffness whose product is evaluated in flux-difference form."""

    def __init__(self, faces, left, right, potential):
        faces = np.asarray(faces, dtype=float)
        diag = np.array(potential, dtype=float)
        diag[:-1] += faces
        diag[1:] += faces
        diag[0] += left
        diag[-1] += right
        super().__init__(-faces, diag, -faces)
        self.faces, self.left, self.right = faces, left, right
        self.potential = np.asarray(potential, dtype=float)

    def __matmul__(self, x):
        dx = x[:-1] - x[1:]
        y = self.potential * x
        y[:-1] += self.faces * dx
        y[1:] -= self.faces * dx
        y[0] += self.left * x[0]
        y[-1] += self.right * x[-1]
        return y

    def quadratic(self, x):
        dx = x[:-1] - x[1:]
        return (self.faces @ dx**2 + self.potential @ x**2
                + self.left * x[0] ** 2 + self.right * x[-1] ** 2)


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue, unit-norm positive eigenfunction and diagnostics.

    ``second`` is the next eigenvalue of the whole operator when it was
    requested (``None`` otherwise).
    """

    eigenvalue: float
    field: ModalField
    residual: float
    mode: int
    iterations: int
    second: float | None = None


def inverse_iteration(A: Tridiagonal, M: Tridiagonal, shift: float = 0.0, x0=None,
                      deflate=(), max_iter: int = MAX_ITER, rtol: float = RQ_TOL, apply=None):
    """Smallest eigenpair of ``A e = lam M e`` (above ``deflate``).

    Returns ``(lam, e, residual, iterations)`` with ``e^T M e = 1`` and
    ``residual = ||M^{-1}(A e - lam M e)||_M``.  ``A`` may be nonsymmetric;
    the eigenvalue estimate is then the ``M``-weighted quotient
    ``e^T A e``, which is exact at an eigenvector.  ``apply`` overrides
    the product with ``A``.

    Iterates are kept in extended precision and every double-precision
    LU solve is followed by refinement sweeps, because a float64 vector
    alone carries a residual of order ``eps ||M^{-1} A||``.  Convergence
    means a relative change below ``rtol`` of the shifted eigenvalue
    ``lam + shift`` together with the residual bound.
    """
    ext = np.longdouble
    apply = apply or A.__matmul__
    shifted = A + M.scaled(shift) if shift else A

    def solve(b):
        y = shifted.solve(b.astype(float)).astype(ext)
        for _ in range(2):
            r = b - (apply(y) + shift * (M @ y) if shift else apply(y))
            y = y + shifted.solve(r.astype(float))
        return y

    x = np.ones(A.diag.size, dtype=ext) if x0 is None else np.asarray(x0, dtype=ext)
    deflate = [np.asarray(v, dtype=ext) for v in deflate]

    def project(x):
        for v in deflate:
            x = x - (v @ (M @ x)) * v
        return x

    x = project(x)
    x /= np.sqrt(x @ (M @ x))
    lam_old = np.inf
    lam = res = np.nan
    for it in range(1, max_iter + 1):
        y = project(solve(M @ x))
        x = y / np.sqrt(y @ (M @ y))
        Ax = apply(x)
        lam = float(A.quadratic(x) if isinstance(A, FluxTridiagonal) else x @ Ax)
        r = Ax - ext(lam) * (M @ x)
        res = float(np.sqrt(max(float(r @ M.solve(r.astype(float))), 0.0)))
        if abs(lam - lam_old) <= rtol * abs(lam + shift) or lam == lam_old:
            if res <= 1e-10 * abs(lam) + 1e-12:
                return lam, _orient(x.astype(float), M), res, it
        lam_old = lam
    raise EigenConvergenceError(f"inverse iteration did not converge in {max_iter} steps "
                                f"(lam={lam:.6g}, residual={res:.3e})")


def _orient(x, M):
    return x if np.sum(M @ x) >= 0 else -x


def mode_pencil(ops: ModeOperators, l: int):
    """``(free_idx, K_l, M)`` restricted to the free nodes of mode ``l``."""
    free, md, mo, _, _ = ops.mode(l)
    return free, FluxTridiagonal(*ops.mode_flux_form(l)), Tridiagonal.symmetric(md, mo)


def _as_field(ops: ModeOperators, spectrum: SurfaceSpectrum, l: int, free, x) -> tuple[ModalField, float]:
    """Embed ``x`` as a field of unit volume-weighted norm; returns ``(field, scale)``.

    The norm is the exact one of :func:`weighted_l2_norm` (constants are
    integrated exactly), not the compact-mass norm used while iterating.
    """
    values = np.zeros((spectrum.n_modes, ops.grid.n_nodes))
    values[l, free] = x
    if ops.eigenvalues[l] == 0:
        values[l, 0] = values[l, 1]
    field = ModalField(values, ops.grid, spectrum, 0.0)
    scale = 1.0 / weighted_l2_norm(field)
    return field.with_values(values * scale), scale


def principal_eigen_of(ops: ModeOperators, spectrum: SurfaceSpectrum, l: int = 0,
                       shift: float = 0.0, second: bool = False) -> EigenPair:
    free, K, M = mode_pencil(ops, l)
    lam, x, res, it = inverse_iteration(K, M, shift)
    lam2 = None
    if second:
        lam2 = inverse_iteration(K, M, shift, x0=np.linspace(1.0, -1.0, x.size), deflate=[x])[0]
    field, scale = _as_field(ops, spectrum, l, free, x)
    return EigenPair(lam, field, res * scale, l, it, lam2)


def principal_eigen_coated(spec: CoatingSpec, spectrum: SurfaceSpectrum, Nb: int = 256,
                           Nc: int = 32, mass: str = "compact") -> EigenPair:
    """Principal eigenpair of the coated operator (radial surface mode)."""
    ops = coated_operators(spec, spectrum, Nb, Nc, mass)
    return principal_eigen_of(ops, spectrum, 0, 0.0)


def principal_eigen_effective(ebc: EbcKind, k: float, spectrum: SurfaceSpectrum, Nb: int = 256,
                              mass: str = "compact", second: bool = True) -> EigenPair:
    """Principal eigenpair over all surface modes, plus the second eigenvalue.

    The minimizing mode is checked to be the constant one.
    """
    ops = effective_operators(ebc, k, spectrum, Nb, mass)
    pairs = [principal_eigen_of(ops, spectrum, l, 1.0, second=(second and l == 0))
             for l in range(spectrum.n_modes)]
    lams = np.array([p.eigenvalue for p in pairs])
    best = int(np.argmin(lams))
    if best != 0 and lams[best] < lams[0] - 1e-12 * max(1.0, abs(lams[0])):
        raise RuntimeError(f"principal eigenvalue found in surface mode {best}, expected mode 0")
    p0 = pairs[0]
    lam2 = None
    if second:
        cands = [p0.second] + [p.eigenvalue for p in pairs[1:]]
        lam2 = float(min(cands))
    return EigenPair(p0.eigenvalue, p0.field, p0.residual, 0, p0.iterations, lam2)


def rayleigh_quotient(field: ModalField, ops: ModeOperators) -> float:
    """``sum_l u_l^T K_l u_l / sum_l u_l^T M u_l`` over the modes of ``field``."""
    u = field.values
    if u.shape != ops.diag.shape:
        raise ValueError("field does not match the operator")
    den = float(np.sum(ops.mass_norm_squared(u)))
    if den == 0.0:
        raise ValueError("Rayleigh quotient of the zero field")
    return float(np.sum(ops.energy(u))) / den


def linearized_pencil(U: ModalField, ops: ModeOperators):
    """``(free, A, M)`` for ``A = K_0 - M diag(1 - U)`` on the radial mode.

    This matches the discrete steady problem ``K U = M f(U)``, so a
    steady state is an exact null vector of ``A``.
    """
    free, K, M = mode_pencil(ops, 0)
    e0 = U.spectrum.e0
    q = 1.0 - U.values[0, free] * e0
    MD = Tridiagonal(M.sub * q[:-1], M.diag * q, M.sup * q[1:])
    A = K + MD.scaled(-1.0)
    A.apply = lambda x: (K @ x) - (MD @ x)
    return free, A, M


def linearized_eigen_at_steady(U: ModalField, ops: ModeOperators) -> EigenPair:
    """Principal eigenpair of the linearization ``-div(A grad) - (1 - U)``."""
    if U.values.shape[1] != ops.grid.n_nodes:
        raise ValueError("steady state does not match the operator grid")
    free, A, M = linearized_pencil(U, ops)
    x0 = np.maximum(U.values[0, free], 0.0) + 1e-3
    lam, x, res, it = inverse_iteration(A, M, shift=1.0, x0=x0, apply=A.apply)
    field, scale = _as_field(ops, U.spectrum, 0, free, x)
    return EigenPair(lam, field, res * scale, 0, it)
