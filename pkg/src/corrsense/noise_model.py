"""Spatial dephasing coefficient matrices for power-law correlated noise.

Sensors sit on a 1-D lattice at integer positions. The coefficient matrix
has off-diagonal entries ``xi * |j - l|**(-alpha)`` and a constant diagonal
``xi * diag_scale``. The diagonal plays the role of the short-distance
regularization; with the default ``diag_scale = 2`` the matrix is positive
semidefinite for every ``alpha > 0`` (the Toeplitz symbol is bounded below
by ``2 - 2*eta(alpha) > 0``).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import toeplitz

from .errors import PSDViolation

PSD_RTOL = 1e-10


@dataclass(frozen=True)
class PowerLawSpatialModel:
    """Parameters of the power-law spatial correlation model."""

    n_sensors: int
    alpha: float
    xi: float = 1.0
    diag_scale: float = 2.0

    def __post_init__(self):
        if int(self.n_sensors) != self.n_sensors or self.n_sensors < 1:
            raise ValueError(f"n_sensors must be a positive integer, got {self.n_sensors!r}")
        for name in ("alpha", "xi", "diag_scale"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class DephasingMatrix:
    """Real symmetric PSD coefficient matrix together with the base rate ``gamma``."""

    entries: np.ndarray
    gamma: float = 1.0

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"coefficient matrix must be square, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("coefficient matrix must be exactly symmetric")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def scaled(self, factor: float) -> "DephasingMatrix":
        return DephasingMatrix(self.entries * factor, self.gamma)

    def without_correlations(self) -> "DephasingMatrix":
        """Same diagonal, all cross-sensor entries zeroed."""
        return DephasingMatrix(np.diag(np.diag(self.entries)), self.gamma)


@dataclass(frozen=True)
class FactorMatrix:
    """Square-root factor ``g`` with ``g.T @ g == A``."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, DephasingMatrix) else np.asarray(A, dtype=float)


def check_psd(A, rtol: float = PSD_RTOL) -> np.ndarray:
    """Return the eigenvalues of ``A``; raise :class:`PSDViolation` if it is not PSD."""
    w = np.linalg.eigvalsh(_entries(A))
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if w[0] < -rtol * scale:
        raise PSDViolation(
            f"min eigenvalue {w[0]:.6g} below -{rtol:g} * {scale:.6g}; "
            "increase diag_scale for this alpha"
        )
    return w


def build_dephasing_matrix(model: PowerLawSpatialModel, gamma: float = 1.0,
                           check: bool = True) -> DephasingMatrix:
    """Build the power-law coefficient matrix for ``model``.

    Parameters
    ----------
    model : PowerLawSpatialModel
        Lattice size, decay exponent, strength and diagonal scale.
    gamma : float
        Base dephasing rate carried alongside the matrix.
    check : bool
        Run the eigenvalue PSD check. Sweeps over large ``N`` switch it off;
        the check is O(N^3).

    Raises
    ------
    PSDViolation
        If the smallest eigenvalue is below ``-1e-10`` times the largest.
    """
    n = model.n_sensors
    d = np.arange(n, dtype=float)
    column = np.empty(n)
    column[0] = model.xi * model.diag_scale
    column[1:] = model.xi * d[1:] ** (-model.alpha)
    A = DephasingMatrix(toeplitz(column), gamma)
    if check:
        check_psd(A)
    return A


def factor_sqrt(A) -> FactorMatrix:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in ``[-1e-10 * lmax, 0)`` are clamped to zero before the
    square root; anything more negative raises :class:`PSDViolation`.
    """
    a = _entries(A)
    w, v = np.linalg.eigh(a)
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if w[0] < -PSD_RTOL * scale:
        raise PSDViolation(f"min eigenvalue {w[0]:.6g} below tolerance")
    g = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return FactorMatrix(0.5 * (g + g.T))


def dxi_factor_product(A, xi: float) -> np.ndarray:
    """``[d g/d xi][d g/d xi]^T`` for ``A(xi) = xi * A(1)``.

    With ``g = sqrt(xi) g(1)`` the product is ``A(1) / (4 xi) = A(xi) / (4 xi^2)``.
    ``A`` is the matrix at strength ``xi``.
    """
    if xi <= 0:
        raise ValueError("xi must be > 0")
    return _entries(A) / (4.0 * xi * xi)


def matrix_sum(A) -> float:
    return float(np.sum(_entries(A)))


def save_matrix_csv(path, M) -> None:
    """Write a real matrix as comma-separated rows at full precision."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    header = ",".join(f"c{j}" for j in range(M.shape[1]))
    np.savetxt(Path(path), M, delimiter=",", fmt="%.17g", header=header, comments="")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(Path(path), delimiter=",", skiprows=1))
