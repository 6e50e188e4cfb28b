"""Quantum Fisher information for estimating the overall dephasing strength.

The short-time QFI growth rate of a pure probe ``psi`` under the correlated
dephasing Lindbladian is

    f_Q(psi) = 2 gamma sum_ab ([d g][d g]^T)_ab <psi| dh_a dh_b |psi>,

with ``dh_a = h_a - <h_a>`` and ``A = g^T g``. For the overall-strength
family ``A(xi) = xi A(1)`` the product is ``[d g][d g]^T = A / (4 xi^2)``.
A fast-reset protocol attains this rate. Product states give
``(gamma / 8 xi^2) sum_a A_aa`` at best and GHZ gives
``(gamma / 8 xi^2) sum_ab A_ab``. Both scale as ``1/xi`` once the
strength is pulled out of ``A``, as a Fisher information about a
scale parameter must.
"""
from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import QubitRegisterState, ghz_ket, z_signs
from .errors import NegativeEntries, SingularInformation
from .noise_model import DephasingMatrix, dxi_factor_product, factor_sqrt

EIG_FLOOR = 1e-12
GHZ_CHECK_MAX_N = 12


class QfiMethod(str, enum.Enum):
    SLD = "SLD"
    FIDELITY_FD = "FidelityFD"
    SHORT_TIME_RATE = "ShortTimeRate"


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: QfiMethod

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"QFI must be >= 0, got {self.value}")
        object.__setattr__(self, "method", QfiMethod(self.method))

    def to_json(self) -> str:
        return json.dumps({"value": self.value, "method": self.method.value})

    @classmethod
    def from_json(cls, text: str) -> "QfiResult":
        d = json.loads(text)
        return cls(float(d["value"]), QfiMethod(d["method"]))


@dataclass(frozen=True)
class MultiparamFqMatrix:
    matrix: np.ndarray

    @property
    def n_params(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> str:
        return json.dumps({"n": self.n_params, "entries": self.matrix.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "MultiparamFqMatrix":
        d = json.loads(text)
        m = np.array(d["entries"], dtype=float).reshape(d["n"], d["n"])
        return cls(m)


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, QubitRegisterState) else np.asarray(x, dtype=complex)


def qfi_sld(rho, drho) -> QfiResult:
    """QFI from the spectral form ``2 sum_kl |<k|drho|l>|^2 / (l_k + l_l)``.

    Pairs with ``l_k + l_l <= 1e-12 * l_max`` are dropped.
    """
    rho, drho = _mat(rho), _mat(drho)
    if rho.shape != drho.shape or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"shape mismatch: rho {rho.shape}, drho {drho.shape}")
    for name, m in (("rho", rho), ("drho", drho)):
        scale = max(np.max(np.abs(m)), 1.0)
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
            raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(drho)) > 1e-10 * max(np.max(np.abs(drho)), 1.0):
        raise ValueError("drho must be traceless")
    lam, V = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    d = V.conj().T @ drho @ V
    denom = lam[:, None] + lam[None, :]
    keep = denom > EIG_FLOOR * max(lam[-1], EIG_FLOOR)
    value = 2.0 * np.sum(np.abs(d[keep]) ** 2 / denom[keep])
    return QfiResult(float(value), QfiMethod.SLD)


def qfi_matrix_sld(rho, drhos) -> np.ndarray:
    """Multiparameter SLD QFI matrix ``2 Re sum_kl d_i[k,l] d_j[l,k] / (l_k + l_l)``."""
    rho = _mat(rho)
    lam, V = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    denom = lam[:, None] + lam[None, :]
    keep = denom > EIG_FLOOR * max(lam[-1], EIG_FLOOR)
    ds = [V.conj().T @ _mat(d) @ V for d in drhos]
    F = np.empty((len(ds), len(ds)))
    for i, di in enumerate(ds):
        for j, dj in enumerate(ds):
            F[i, j] = 2.0 * np.real(np.sum(di[keep] * dj.T[keep] / denom[keep]))
    return F


def _ket(psi) -> np.ndarray:
    if isinstance(psi, QubitRegisterState):
        psi = psi.ket()
    psi = np.asarray(psi, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state vector not normalized (norm {norm})")
    return psi


def connected_correlators(psi) -> np.ndarray:
    """``<dh_a dh_b>`` for ``h_a = Z_a / 2``; real and symmetric since the ``h_a`` commute."""
    psi = _ket(psi)
    n = psi.size.bit_length() - 1
    if psi.size != 2 ** n:
        raise ValueError("state vector length must be a power of two")
    prob = np.abs(psi) ** 2
    D = 0.5 * z_signs(n)
    mean = prob @ D
    second = D.T @ (prob[:, None] * D)
    return second - np.outer(mean, mean)


def fq_short_time(psi, A: DephasingMatrix, gamma: float, xi: float) -> float:
    """Short-time QFI rate of a pure probe about the overall strength ``xi``."""
    cov = connected_correlators(psi)
    a = A.entries if isinstance(A, DephasingMatrix) else np.asarray(A, dtype=float)
    if cov.shape != a.shape:
        raise ValueError(f"coefficient matrix is {a.shape}, state has {cov.shape[0]} qubits")
    return float(2.0 * gamma * np.sum(dxi_factor_product(a, xi) * cov))


def optimal_separable_rate(A, gamma: float, xi: float) -> float:
    """Best rate over unentangled probes, attained by ``|+>^N``: ``(gamma / 8 xi^2) sum_a A_aa``."""
    a = A.entries if isinstance(A, DephasingMatrix) else np.asarray(A, dtype=float)
    return float(gamma / (8.0 * xi * xi) * np.trace(a))


def optimal_entangled_rate(A, gamma: float, xi: float, check_ghz: bool = True) -> float:
    """Best rate over all probes, ``(gamma / 8 xi^2) sum_ab A_ab``, attained by GHZ.

    Raises
    ------
    NegativeEntries
        If any coefficient is negative; the GHZ state is then not known to be optimal.
    """
    a = A.entries if isinstance(A, DephasingMatrix) else np.asarray(A, dtype=float)
    if np.any(a < 0):
        raise NegativeEntries("optimal entangled rate requires nonnegative coefficients")
    value = float(gamma / (8.0 * xi * xi) * np.sum(a))
    n = a.shape[0]
    if check_ghz and n <= GHZ_CHECK_MAX_N:
        ghz = fq_short_time(ghz_ket(n), a, gamma, xi)
        if abs(ghz - value) > 1e-12 * max(abs(value), 1.0):
            raise AssertionError(f"GHZ rate {ghz} does not attain the bound {value}")
    return value


def advantage_ratio(A, gamma: float = 1.0, xi: float = 1.0) -> float:
    """Entanglement advantage ``sum_ab A_ab / sum_a A_aa``."""
    return (optimal_entangled_rate(A, gamma, xi, check_ghz=False)
            / optimal_separable_rate(A, gamma, xi))


def fq_multiparam_matrix(psi, partial_g_products, gamma: float) -> MultiparamFqMatrix:
    """Matrix ``F_lj = 2 gamma sum_ab P^{lj}_ab <dh_a dh_b>``.

    ``partial_g_products`` is an ``n x n`` nested sequence (or array of shape
    ``(n, n, N, N)``) of the derivative products for each parameter pair.
    """
    cov = connected_correlators(psi)
    P = np.asarray(partial_g_products, dtype=float)
    if P.ndim != 4 or P.shape[0] != P.shape[1] or P.shape[2:] != cov.shape:
        raise ValueError(f"expected (n, n, {cov.shape[0]}, {cov.shape[0]}) products, got {P.shape}")
    F = 2.0 * gamma * np.einsum("ljab,ab->lj", P, cov)
    scale = max(np.max(np.abs(F)), 1.0)
    if np.max(np.abs(F - F.T)) > 1e-10 * scale:
        raise ValueError("multiparameter information matrix is not symmetric; inconsistent products")
    return MultiparamFqMatrix(0.5 * (F + F.T))


def sublattice_products(A1, labels, xis) -> np.ndarray:
    """Derivative products for ``A(xi_1..xi_m) = S A1 S`` with ``S = diag(sqrt(xi_{label_j}))``.

    Uses ``g = A1^(1/2) S`` (so ``g^T g = A``) and returns
    ``P^{lj} = (d_l g)^T (d_j g)``, indexed by sensors. With one parameter this
    reduces to ``A / (4 xi^2)``.
    """
    a1 = A1.entries if isinstance(A1, DephasingMatrix) else np.asarray(A1, dtype=float)
    labels = np.asarray(labels)
    xis = np.asarray(xis, dtype=float)
    root = factor_sqrt(a1).entries
    m = xis.size
    dS = [np.diag(np.where(labels == k, 0.5 / np.sqrt(xis[k]), 0.0)) for k in range(m)]
    dg = [root @ d for d in dS]
    return np.array([[dg[l].T @ dg[j] for j in range(m)] for l in range(m)])


def linear_function_bound(F, weights) -> float:
    """Per-unit-time variance bound ``a^T F^-1 a`` for the linear combination ``a . xi``."""
    F = F.matrix if isinstance(F, MultiparamFqMatrix) else np.asarray(F, dtype=float)
    a = np.asarray(weights, dtype=float)
    if np.linalg.cond(F) > 1e12:
        warnings.warn("information matrix is singular; using pseudo-inverse",
                      SingularInformation, stacklevel=2)
        return float(a @ np.linalg.pinv(F) @ a)
    return float(a @ np.linalg.solve(F, a))
