"""Exact pure-dephasing evolution of N-qubit registers.

Every sensor couples through ``h_j = Z_j / 2``. Qubit 0 is the most
significant bit of the computational-basis index, and bit value 0 carries
the Z eigenvalue ``s_j = +1``.

Under correlated dephasing each basis coherence evolves independently:

    rho[s, s'](t) = rho[s, s'](0) * exp(-gamma t (ds^T A ds) / 16),  ds = s - s'.

Noise with a factorized spectrum ``S_jl(w) = xi A1_jl |w|^-p`` under a
common pulse train gives the same structure with the exponent replaced by
``xi t^(1+p) C (ds^T A1 ds) / 4``. For a single qubit this is exactly the
one-qubit decay ``exp(-zeta)`` with strength ``xi * A1_00``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .noise_model import DephasingMatrix
from .pulse_filter import PulseSequence, SpectralModel, check_exponent, coefficient_closed_form

MAX_QUBITS = 14


def z_signs(n: int) -> np.ndarray:
    """``(2^n, n)`` array of Z eigenvalues ``s_j = +-1`` for every basis state."""
    idx = np.arange(2 ** n)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return 1.0 - 2.0 * bits


@dataclass(frozen=True)
class QubitRegisterState:
    """Dense density matrix of an ``n_qubits`` register."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dim = m.shape[0]
        if m.ndim != 2 or m.shape[1] != dim or dim & (dim - 1) or dim < 2:
            raise ValueError(f"density matrix must be 2^N x 2^N, got shape {m.shape}")
        if dim > 2 ** MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits supported")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def validate(self, tol: float = 1e-12) -> "QubitRegisterState":
        m = self.matrix
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"trace {np.trace(m)} != 1")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(m)[0] < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        return self

    @classmethod
    def from_ket(cls, psi) -> "QubitRegisterState":
        psi = np.asarray(psi, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state vector not normalized (norm {norm})")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def ghz(cls, n: int) -> "QubitRegisterState":
        return cls.from_ket(ghz_ket(n))

    @classmethod
    def plus_product(cls, n: int) -> "QubitRegisterState":
        return cls.from_ket(plus_product_ket(n))

    def ket(self, tol: float = 1e-10) -> np.ndarray:
        """Return a state vector if the state is pure, else raise ``ValueError``."""
        w, v = np.linalg.eigh(self.matrix)
        if abs(w[-1] - 1.0) > tol:
            raise ValueError(f"state is mixed (largest eigenvalue {w[-1]:.6g})")
        psi = v[:, -1]
        k = int(np.argmax(np.abs(psi)))
        return psi * (abs(psi[k]) / psi[k])


def ghz_ket(n: int) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return psi


def plus_product_ket(n: int) -> np.ndarray:
    return np.full(2 ** n, 2.0 ** (-n / 2), dtype=complex)


def _as_matrix(state) -> np.ndarray:
    return state.matrix if isinstance(state, QubitRegisterState) else np.asarray(state, dtype=complex)


def _coefficients(A) -> np.ndarray:
    return A.entries if isinstance(A, DephasingMatrix) else np.asarray(A, dtype=float)


def coherence_exponents(A, n: int | None = None) -> np.ndarray:
    """Matrix ``q[s, s'] = (s - s')^T A (s - s') / 16`` over all basis pairs."""
    a = _coefficients(A)
    n = a.shape[0] if n is None else n
    if a.shape != (n, n):
        raise ValueError(f"coefficient matrix is {a.shape}, register has {n} qubits")
    S = z_signs(n)
    M = S @ a @ S.T
    u = np.diag(M)
    q = (u[:, None] + u[None, :] - 2.0 * M) / 16.0
    # exact zeros on the diagonal; populations never decay
    np.fill_diagonal(q, 0.0)
    return np.maximum(q, 0.0)


def _check_dims(rho: np.ndarray, A) -> int:
    n = rho.shape[0].bit_length() - 1
    if _coefficients(A).shape != (n, n):
        raise ValueError(
            f"coefficient matrix is {_coefficients(A).shape}, state has {n} qubits")
    return n


def evolve_markovian(state, A: DephasingMatrix, t: float) -> QubitRegisterState:
    """Closed-form solution of the correlated dephasing Lindbladian at time ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    rho = _as_matrix(state)
    n = _check_dims(rho, A)
    if t == 0:
        return QubitRegisterState(rho.copy())
    q = coherence_exponents(A, n)
    return QubitRegisterState(rho * np.exp(-A.gamma * t * q))


def markovian_xi_derivative(state, A: DephasingMatrix, t: float, xi: float) -> np.ndarray:
    """``d rho(t) / d xi`` for the overall-strength family ``A(xi) = xi A(1)``."""
    rho_t = evolve_markovian(state, A, t).matrix
    q = coherence_exponents(A)
    return rho_t * (-A.gamma * t * q / xi)


def effective_decay(A_spatial, spec: SpectralModel, pulses: PulseSequence, t_s: float) -> np.ndarray:
    """Exponent matrix ``xi t^(1+p) C (ds^T A1 ds) / 4`` for the spatiotemporal model."""
    check_exponent(pulses, spec.p)
    C = coefficient_closed_form(pulses, spec.p).value
    return 4.0 * spec.xi * t_s ** (1.0 + spec.p) * C * coherence_exponents(A_spatial)


def evolve_spatiotemporal(state, A_spatial, spec: SpectralModel, pulses: PulseSequence,
                          t_s: float) -> QubitRegisterState:
    """Register state after time ``t_s`` under factorized 1/f^p noise and a common pulse train.

    ``A_spatial`` is the unit-strength spatial matrix; the overall strength is
    ``spec.xi``. This equals Markovian evolution with ``A = xi * A_spatial``
    and rate ``gamma`` at the effective time ``4 t_s^(1+p) C / gamma``.

    Raises
    ------
    UnsupportedExponent
        If ``spec.p`` is outside the window of ``pulses`` ((-1, 1) without DC
        cancellation, (-1, 3) with it).
    """
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    rho = _as_matrix(state)
    _check_dims(rho, A_spatial)
    check_exponent(pulses, spec.p)
    if t_s == 0:
        return QubitRegisterState(rho.copy())
    return QubitRegisterState(rho * np.exp(-effective_decay(A_spatial, spec, pulses, t_s)))


def spatiotemporal_xi_derivative(state, A_spatial, spec, pulses, t_s) -> np.ndarray:
    rho_t = evolve_spatiotemporal(state, A_spatial, spec, pulses, t_s).matrix
    return rho_t * (-effective_decay(A_spatial, spec, pulses, t_s) / spec.xi)


def effective_time(spec: SpectralModel, pulses: PulseSequence, t_s: float, gamma: float = 1.0) -> float:
    """Markovian time that reproduces the spatiotemporal state (with ``A = xi * A1``)."""
    C = coefficient_closed_form(pulses, spec.p).value
    return 4.0 * t_s ** (1.0 + spec.p) * C / gamma


def dephasing_generators(n: int) -> list:
    """Dense ``Z_j / 2`` operators; only the integrator oracle needs them explicitly."""
    z = np.diag([0.5, -0.5]).astype(complex)
    ops = []
    for j in range(n):
        op = np.ones((1, 1), dtype=complex)
        for k in range(n):
            op = np.kron(op, z if k == j else np.eye(2))
        ops.append(op)
    return ops


def lindblad_rhs(rho, A, gamma: float, generators=None) -> np.ndarray:
    """Generic dephasing generator ``(gamma/2) sum_jl A_jl (h_l rho h_j - {h_j h_l, rho}/2)``.

    Works on dense operators so it stays independent of the closed-form
    coherence factors it is used to check.
    """
    rho = _as_matrix(rho)
    a = _coefficients(A)
    n = rho.shape[0].bit_length() - 1
    if a.shape != (n, n):
        raise ValueError(f"coefficient matrix is {a.shape}, state has {n} qubits")
    h = dephasing_generators(n) if generators is None else [np.asarray(g, dtype=complex) for g in generators]
    # sum_jl a_jl h_l rho h_j = sum_l h_l rho m_l with m_l = sum_j a_jl h_j
    out = np.zeros_like(rho)
    anti = np.zeros_like(rho)
    for l in range(n):
        m_l = np.zeros_like(rho)
        for j in range(n):
            m_l += a[j, l] * h[j]
        out += h[l] @ rho @ m_l
        anti += m_l @ h[l]
    out -= 0.5 * (anti @ rho + rho @ anti)
    return 0.5 * gamma * out


def save_state_txt(path, state, tol: float = 0.0) -> None:
    """Write nonzero entries as ``row,col,re,im`` lines at full precision."""
    m = _as_matrix(state)
    rows, cols = np.nonzero(np.abs(m) > tol)
    with open(Path(path), "w") as fh:
        fh.write(f"# dim={m.shape[0]}\nrow,col,re,im\n")
        for r, c in zip(rows, cols):
            v = m[r, c]
            fh.write(f"{r},{c},{v.real:.17g},{v.imag:.17g}\n")


def load_state_txt(path) -> QubitRegisterState:
    dim = None
    entries = []
    with open(Path(path)) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("row"):
                continue
            if line.startswith("#"):
                if "dim=" in line:
                    dim = int(line.split("dim=")[1])
                continue
            r, c, re, im = line.split(",")
            entries.append((int(r), int(c), float(re) + 1j * float(im)))
    if dim is None:
        dim = 1 + max(max(r, c) for r, c, _ in entries)
    m = np.zeros((dim, dim), dtype=complex)
    for r, c, v in entries:
        m[r, c] = v
    return QubitRegisterState(m)
