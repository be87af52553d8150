"""Interface geometry with an analytic Laplace-Beltrami spectrum.

Two surfaces are supported: the sphere of radius ``R1`` restricted to
axisymmetric fields (Legendre modes in ``cos(phi)``) and the circle of
radius ``R1`` (Fourier modes), the latter as a two-dimensional analogue.
All eigenfunctions are orthonormal in ``L2(Gamma)`` with respect to the
surface measure of the actual radius ``R1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre


class ParameterDomainError(ValueError):
    """A parameter lies outside the domain where an operation is defined."""


@dataclass(frozen=True)
class SurfaceSpectrum:
    """Laplace-Beltrami eigenpairs, quadrature and curvature data of a surface.

    Attributes
    ----------
    kind : {'sphere', 'circle'}
    R1 : float
        Radius of the interface.
    L : int
        Modal truncation degree.  The sphere carries ``L + 1`` Legendre
        modes, the circle ``2L + 1`` Fourier modes (cos/sin pairs).
    eigenvalues : ndarray
        Eigenvalues of ``-Delta_Gamma``, nondecreasing, first entry 0.
    nodes, weights : ndarray
        Surface quadrature.  For the sphere the nodes are ``cos(phi)``
        values, for the circle they are angles.  Weights include the
        surface measure so ``sum(weights) == area``.
    basis : ndarray, shape (n_nodes, n_modes)
        Eigenfunctions sampled at the nodes.
    """

    kind: str
    R1: float
    L: int
    eigenvalues: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def dim(self) -> int:
        """Dimension of the ambient space (3 for the sphere, 2 for the circle)."""
        return 3 if self.kind == "sphere" else 2

    @property
    def surface_area(self) -> float:
        if self.kind == "sphere":
            return 4.0 * np.pi * self.R1**2
        return 2.0 * np.pi * self.R1

    @property
    def mean_curvature(self) -> float:
        # circle: half the curve curvature, so 1 + 2Hr reproduces 1 + r/R1
        return 1.0 / self.R1 if self.kind == "sphere" else 0.5 / self.R1

    @property
    def gaussian_curvature(self) -> float:
        return 1.0 / self.R1**2 if self.kind == "sphere" else 0.0

    @property
    def bulk_volume(self) -> float:
        """Volume (area for the circle) of the enclosed region."""
        return self.surface_area * self.R1 / self.dim

    @property
    def e0(self) -> float:
        """Value of the constant eigenfunction, ``1/sqrt(|Gamma|)``."""
        return 1.0 / np.sqrt(self.surface_area)

    def constant_mode(self) -> np.ndarray:
        """Coefficients of the function identically equal to one."""
        g = np.zeros(self.n_modes)
        g[0] = np.sqrt(self.surface_area)
        return g

    def evaluate(self, coeffs, points) -> np.ndarray:
        """Evaluate ``sum_n coeffs[n] e_n`` at arbitrary points.

        ``points`` are ``cos(phi)`` values for the sphere and angles for
        the circle.  Extra leading dimensions of ``coeffs`` are not
        supported; pass one coefficient vector.
        """
        return _basis(self.kind, self.R1, self.L, np.asarray(points, float)) @ np.asarray(coeffs)

    def same_as(self, other: "SurfaceSpectrum") -> bool:
        return (self.kind, self.R1, self.L) == (other.kind, other.R1, other.L)


def _basis(kind, R1, L, pts):
    pts = np.atleast_1d(pts)
    if kind == "sphere":
        cols = []
        for l in range(L + 1):
            c = np.zeros(l + 1)
            c[l] = 1.0
            cols.append(np.sqrt((2 * l + 1) / (4.0 * np.pi * R1**2)) * legendre.legval(pts, c))
        return np.stack(cols, axis=-1)
    cols = [np.full_like(pts, 1.0 / np.sqrt(2.0 * np.pi * R1))]
    for n in range(1, L + 1):
        cols.append(np.cos(n * pts) / np.sqrt(np.pi * R1))
        cols.append(np.sin(n * pts) / np.sqrt(np.pi * R1))
    return np.stack(cols, axis=-1)


def build_surface(kind: str, R1: float, L: int) -> SurfaceSpectrum:
    """Instantiate a surface with its spectrum truncated at degree ``L``.

    Examples
    --------
    >>> build_surface("sphere", 1.0, 4).eigenvalues
    array([ 0.,  2.,  6., 12., 20.])
    """
    if not R1 > 0:
        raise ParameterDomainError(f"radius must be positive, got {R1}")
    if int(L) != L or L < 0:
        raise ParameterDomainError(f"mode count must be a non-negative integer, got {L}")
    L = int(L)
    R1 = float(R1)
    if kind == "sphere":
        x, w = legendre.leggauss(L + 1)
        weights = 2.0 * np.pi * R1**2 * w
        degrees = np.arange(L + 1)
        lam = degrees * (degrees + 1) / R1**2
        nodes = x
    elif kind == "circle":
        n = 2 * L + 1
        nodes = 2.0 * np.pi * np.arange(n) / n
        weights = np.full(n, 2.0 * np.pi * R1 / n)
        degrees = np.concatenate([[0], np.repeat(np.arange(1, L + 1), 2)])
        lam = (degrees / R1) ** 2
    else:
        raise ParameterDomainError(f"unknown surface kind {kind!r}")
    basis = _basis(kind, R1, L, nodes)
    for arr in (lam, nodes, weights, basis, degrees):
        arr.setflags(write=False)
    return SurfaceSpectrum(kind, R1, L, lam.astype(float), nodes, weights, basis, degrees)


def forward_transform(spectrum: SurfaceSpectrum, samples) -> np.ndarray:
    """Modal coefficients ``g_n = sum_q w_q e_n(x_q) g(x_q)``.

    ``samples`` has the quadrature nodes along its first axis; any
    trailing axes (e.g. radial nodes) are transformed independently.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != spectrum.n_nodes:
        raise ValueError(f"expected {spectrum.n_nodes} samples along axis 0, got {samples.shape[0]}")
    return (spectrum.basis * spectrum.weights[:, None]).T @ samples


def inverse_transform(spectrum: SurfaceSpectrum, coeffs) -> np.ndarray:
    """Synthesis ``sum_n g_n e_n`` on the quadrature nodes."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != spectrum.n_modes:
        raise ValueError(f"expected {spectrum.n_modes} coefficients along axis 0, got {coeffs.shape[0]}")
    return spectrum.basis @ coeffs


def volume_factor(spectrum: SurfaceSpectrum, r) -> np.ndarray:
    """Jacobian ``1 + 2 H r + kappa r**2`` of the normal coordinate ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterDomainError("normal distance must be non-negative")
    H, kappa = spectrum.mean_curvature, spectrum.gaussian_curvature
    return 1.0 + 2.0 * H * r + kappa * r**2
