"""Dirichlet-to-Neumann map of a harmonic layer and its fractional limit.

For boundary data ``g = sum g_n e_n`` the bounded solution of
``Psi_RR + Delta_Gamma Psi = 0`` on ``Gamma x (0, h)`` with ``Psi(., 0) = g``
and ``Psi(., h) = 0`` has normal derivative

    Psi_R(s, 0) = sum_n m_n g_n e_n(s),   m_n = -sqrt(lam_n) / tanh(sqrt(lam_n) h),

so the operator is diagonal in the Laplace-Beltrami eigenbasis.  For
``h = inf`` the multipliers become ``-sqrt(lam_n)``, i.e. minus the square
root of ``-Delta_Gamma``.  The constant mode uses the ``lam -> 0`` limit
``-1/h`` (zero for the infinite layer).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from .surface import ParameterDomainError, SurfaceSpectrum


def _coth_minus_one(x):
    # coth(x) - 1 = 2 / (exp(2x) - 1); exact zero at x = inf
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return 2.0 / np.expm1(2.0 * x)


def dtn_multipliers(eigenvalues, h) -> np.ndarray:
    """Diagonal of the DtN map for depth ``h`` (may be ``np.inf``)."""
    lam = np.asarray(eigenvalues, dtype=float)
    if not h > 0:
        raise ParameterDomainError(f"layer depth must be positive, got {h}")
    root = np.sqrt(lam)
    m = np.empty_like(lam)
    pos = lam > 0
    if np.isinf(h):
        m[pos] = -root[pos]
        m[~pos] = 0.0
    else:
        x = root[pos] * h
        # 1 - exp(-2x) through expm1 keeps thin layers exact
        m[pos] = -root[pos] * (1.0 + np.exp(-2.0 * x)) / -np.expm1(-2.0 * x)
        m[~pos] = -1.0 / h
    return m


@dataclass(frozen=True)
class DtnOperator:
    """``J^h`` on a given surface, stored through its modal multipliers."""

    spectrum: SurfaceSpectrum
    h: float
    multipliers: np.ndarray

    def __call__(self, g):
        return apply_dtn(self, g)


def build_dtn(spectrum: SurfaceSpectrum, h) -> DtnOperator:
    """Build ``J^h``; ``h = np.inf`` gives ``-(-Delta_Gamma)^(1/2)``."""
    h = float(h)
    m = dtn_multipliers(spectrum.eigenvalues, h)
    m.setflags(write=False)
    return DtnOperator(spectrum, h, m)


def apply_dtn(op: DtnOperator, g) -> np.ndarray:
    """Apply the operator to modal coefficients ``g`` (modes on axis 0)."""
    g = np.asarray(g, dtype=float)
    if g.shape[0] != op.spectrum.n_modes:
        raise ValueError(f"coefficient vector has {g.shape[0]} modes, operator has {op.spectrum.n_modes}")
    return op.multipliers.reshape((-1,) + (1,) * (g.ndim - 1)) * g


@dataclass(frozen=True)
class LayerProfile:
    """Per-mode values ``Psi_n(R)`` of the harmonic layer profile."""

    g: np.ndarray
    h: float
    R: np.ndarray
    values: np.ndarray  # shape (n_modes, len(R))
    spectrum: SurfaceSpectrum

    def synthesize(self) -> np.ndarray:
        """Pointwise values on (surface nodes) x (R grid)."""
        return self.spectrum.basis @ self.values


def solve_layer_profile(spectrum: SurfaceSpectrum, g, h, R) -> LayerProfile:
    """Closed-form separated solution of the rescaled layer problem.

    Each mode is ``g_n sinh(sqrt(lam_n)(h - R)) / sinh(sqrt(lam_n) h)``,
    evaluated in decaying-exponential form; the constant mode is linear,
    ``g_0 (1 - R/h)``.  For ``h = inf`` the bounded solution
    ``g_n exp(-sqrt(lam_n) R)`` is returned.
    """
    g = np.asarray(g, dtype=float)
    R = np.asarray(R, dtype=float)
    h = float(h)
    if not h > 0:
        raise ParameterDomainError(f"layer depth must be positive, got {h}")
    if np.any(R < 0) or np.any(R > h):
        raise ParameterDomainError("profile grid must lie in [0, h]")
    if g.shape != (spectrum.n_modes,):
        raise ValueError("boundary data must be one coefficient per mode")
    root = np.sqrt(spectrum.eigenvalues)[:, None]
    Rg = R[None, :]
    vals = np.empty((spectrum.n_modes, R.size))
    pos = spectrum.eigenvalues > 0
    if np.isinf(h):
        vals[pos] = np.exp(-root[pos] * Rg)
        vals[~pos] = 1.0
    else:
        num = -np.expm1(-2.0 * root[pos] * (h - Rg))
        den = -np.expm1(-2.0 * root[pos] * h)
        vals[pos] = np.exp(-root[pos] * Rg) * num / den
        vals[~pos] = 1.0 - Rg / h
    vals *= g[:, None]
    return LayerProfile(g, h, R, vals, spectrum)


def dtn_deviation(spectrum: SurfaceSpectrum, h, H, g) -> float:
    """``||J^h[g] - J^H[g]||_{L2(Gamma)}`` without cancellation error."""
    lam = spectrum.eigenvalues
    g = np.asarray(g, dtype=float)
    root = np.sqrt(lam)
    diff = np.empty_like(lam)
    pos = lam > 0
    ch = _coth_minus_one(root[pos] * h)
    cH = _coth_minus_one(root[pos] * H)
    diff[pos] = -root[pos] * (ch - cH)
    diff[~pos] = -(1.0 / h) + (1.0 / H)
    return float(np.sqrt(np.sum((diff * g) ** 2)))


def c2_norm(spectrum: SurfaceSpectrum, g, n_dense: int = 2001) -> float:
    """``sup|g| + sup|grad g| + sup|Hess g|`` on a dense grid.

    The Hessian size is the largest absolute eigenvalue of the surface
    Hessian.  For axisymmetric fields on the sphere the two principal
    values are ``g_phiphi / R^2`` and ``-x g_x / R^2`` with ``x = cos(phi)``.
    """
    g = np.asarray(g, dtype=float)
    R = spectrum.R1
    if spectrum.kind == "sphere":
        x = np.cos(np.linspace(0.0, np.pi, n_dense))
        c = g * np.sqrt((2 * np.arange(g.size) + 1) / (4.0 * np.pi * R**2))
        val = legendre.legval(x, c)
        gx = legendre.legval(x, legendre.legder(c))
        gxx = legendre.legval(x, legendre.legder(c, 2))
        grad = np.sqrt(1.0 - x**2) * np.abs(gx) / R
        hess = np.maximum(np.abs((1.0 - x**2) * gxx - x * gx), np.abs(x * gx)) / R**2
    else:
        th = np.linspace(0.0, 2.0 * np.pi, n_dense)
        orders = spectrum.degrees
        val = np.zeros_like(th)
        d1 = np.zeros_like(th)
        d2 = np.zeros_like(th)
        for j, n in enumerate(orders):
            if j == 0:
                val += g[0] / np.sqrt(2.0 * np.pi * R)
                continue
            s = 1.0 / np.sqrt(np.pi * R)
            if j % 2 == 1:
                val += g[j] * s * np.cos(n * th)
                d1 += -g[j] * s * n * np.sin(n * th)
                d2 += -g[j] * s * n**2 * np.cos(n * th)
            else:
                val += g[j] * s * np.sin(n * th)
                d1 += g[j] * s * n * np.cos(n * th)
                d2 += -g[j] * s * n**2 * np.sin(n * th)
        grad = np.abs(d1) / R
        hess = np.abs(d2) / R**2
    return float(np.max(np.abs(val)) + np.max(grad) + np.max(hess))
