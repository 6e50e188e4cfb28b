"""Independent numerical oracles: noise-trajectory sampling, RK4 integration, fidelity QFI.

Random numbers come from per-block substreams
``SeedSequence(seed, spawn_key=(block,))`` with a fixed block size, so
results depend only on ``(seed, n_traj)``. They do not depend on the
worker count, and growing ``n_traj`` only appends trajectories.
Block partial sums are combined in a fixed pairwise tree.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import QubitRegisterState, dephasing_generators, evolve_markovian, lindblad_rhs, z_signs
from .errors import GridTooCoarse, StepTooCoarse
from .noise_model import DephasingMatrix, factor_sqrt
from .pulse_filter import PulseSequence, SpectralModel
from .qfi import QfiMethod, QfiResult

BLOCK = 512
MIN_TRAJ = 100


@dataclass(frozen=True)
class Estimate:
    label: str
    mean: float
    stderr: float

    def within(self, target: float, n_sigma: float = 3.0, abs_tol: float = 0.0) -> bool:
        return abs(self.mean - target) <= n_sigma * self.stderr + abs_tol


@dataclass
class TrajectoryEnsemble:
    n_traj: int
    seed: int
    dt: float | None
    estimates: list = field(default_factory=list)
    rho: np.ndarray | None = None

    def __post_init__(self):
        if self.n_traj < MIN_TRAJ:
            raise ValueError(f"n_traj must be >= {MIN_TRAJ}")

    def __getitem__(self, label: str) -> Estimate:
        for e in self.estimates:
            if e.label == label:
                return e
        raise KeyError(label)

    def to_json(self) -> str:
        return json.dumps({
            "n_traj": self.n_traj,
            "seed": self.seed,
            "estimates": [{"label": e.label, "mean": e.mean, "stderr": e.stderr}
                          for e in self.estimates],
        })


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def tree_sum(parts):
    """Pairwise sum in a fixed tree shape over the given order."""
    parts = list(parts)
    if not parts:
        return 0.0
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _run_blocks(n_traj: int, seed: int, block_fn, threads: int = 1):
    """Evaluate ``block_fn(rng, size)`` per block and tree-reduce ``(sum, sumsq)`` pairs."""
    n_blocks = -(-n_traj // BLOCK)

    def job(b):
        size = min(BLOCK, n_traj - b * BLOCK)
        values = np.asarray(block_fn(block_rng(seed, b), b, size), dtype=float)
        return values.sum(axis=0), (values * values).sum(axis=0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(job, range(n_blocks)))
    else:
        results = [job(b) for b in range(n_blocks)]
    s1 = tree_sum([r[0] for r in results])
    s2 = tree_sum([r[1] for r in results])
    mean = s1 / n_traj
    var = (s2 - n_traj * np.abs(mean) ** 2) / (n_traj - 1)
    return mean, np.sqrt(np.maximum(var, 0.0) / n_traj)


def _pairs(rho0: np.ndarray):
    """Upper-triangular coherences present in the initial state."""
    r, c = np.nonzero(np.triu(np.abs(rho0) > 0, k=1))
    return r, c


def max_white_step(A: DephasingMatrix, gamma: float) -> float:
    lmax = float(np.linalg.eigvalsh(A.entries)[-1])
    return 0.01 / (gamma * lmax) if lmax > 0 else np.inf


def sample_white_correlated(A: DephasingMatrix, gamma: float, t: float, dt: float,
                            n_traj: int, seed: int, state=None,
                            threads: int = 1) -> TrajectoryEnsemble:
    """Average random-phase unitaries driven by correlated white noise.

    Each step draws increments with covariance ``gamma A dt / 2`` through
    the symmetric factor of ``A``. That rate makes the ensemble-averaged
    coherence ``exp(-gamma t (ds^T A ds) / 16)``, matching the Lindbladian
    with ``h_j = Z_j / 2``. Estimates are the decay factors ``E[cos(phase)]``
    of every coherence present in ``state`` (GHZ by default).

    Raises
    ------
    StepTooCoarse
        If ``dt > 0.01 / (gamma * lambda_max(A))``.
    """
    n = A.n
    if dt > max_white_step(A, gamma) * (1 + 1e-12):
        raise StepTooCoarse(f"dt={dt} exceeds 0.01/(gamma lambda_max) = {max_white_step(A, gamma):.4g}")
    state = QubitRegisterState.ghz(n) if state is None else state
    rho0 = state.matrix if isinstance(state, QubitRegisterState) else np.asarray(state, dtype=complex)
    n_steps = max(1, int(math.ceil(t / dt - 1e-9)))
    step = t / n_steps
    g = factor_sqrt(A).entries * math.sqrt(gamma * step / 2.0)
    S = z_signs(n)
    r, c = _pairs(rho0)
    half_ds = 0.5 * (S[r] - S[c])  # (n_pairs, n)

    def block(rng, b, size):
        phases = np.zeros((size, n))
        for _ in range(n_steps):
            phases += rng.standard_normal((size, n)) @ g
        return np.cos(phases @ half_ds.T)

    mean, se = _run_blocks(n_traj, seed, block, threads)
    decay = np.ones(rho0.shape)
    decay[r, c] = decay[c, r] = mean
    est = [Estimate(f"decay[{i},{j}]", float(m), float(s)) for i, j, m, s in zip(r, c, mean, se)]
    return TrajectoryEnsemble(n_traj, seed, step, est, rho0 * decay)


def increment_covariance_check(A: DephasingMatrix, gamma: float, dt: float, n_samples: int,
                               seed: int) -> tuple:
    """Empirical increment covariance against ``gamma A dt / 2``.

    Returns ``(max |emp - target| / (target_scale), bound)`` where the bound
    is ``5 / sqrt(n_samples)``.
    """
    g = factor_sqrt(A).entries * math.sqrt(gamma * dt / 2.0)
    x = block_rng(seed, 0).standard_normal((n_samples, A.n)) @ g
    emp = x.T @ x / n_samples
    target = gamma * A.entries * dt / 2.0
    scale = np.sqrt(np.outer(np.diag(target), np.diag(target)))
    return float(np.max(np.abs(emp - target) / scale)), 5.0 / math.sqrt(n_samples)


def synthesis_grid(omega_cut: float, t_s: float, n_modes: int = 4096) -> tuple:
    """Nodes and trapezoid weights: log-spaced on ``[omega_cut, 1/(10 t)]``, linear up to ``200/t``."""
    w_split = 0.1 / t_s
    w_max = 200.0 / t_s
    if omega_cut >= w_split:
        nodes = np.linspace(omega_cut, w_max, n_modes)
    else:
        n_log = max(n_modes // 8, 16)
        log_part = np.geomspace(omega_cut, w_split, n_log)
        lin_part = np.linspace(w_split, w_max, n_modes - n_log + 1)[1:]
        nodes = np.r_[log_part, lin_part]
    weights = np.empty_like(nodes)
    dw = np.diff(nodes)
    weights[0] = dw[0] / 2
    weights[-1] = dw[-1] / 2
    weights[1:-1] = (dw[:-1] + dw[1:]) / 2
    return nodes, weights


def _toggle_projections(pulses: PulseSequence, t_s: float, omega: np.ndarray) -> tuple:
    """``int_0^t F(t') cos(w t') dt'`` and the sine analogue, segment by segment."""
    edges = pulses.edges(t_s)
    ic = np.zeros_like(omega)
    is_ = np.zeros_like(omega)
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        sgn = -1.0 if k % 2 else 1.0
        ic += sgn * (np.sin(omega * b) - np.sin(omega * a)) / omega
        is_ += sgn * (np.cos(omega * a) - np.cos(omega * b)) / omega
    return ic, is_


def _mode_loadings(spec: SpectralModel, pulses: PulseSequence, t_s: float, grid) -> tuple:
    if grid is None:
        grid = synthesis_grid(max(spec.omega_cut, 1e-12 / t_s), t_s)
    nodes, weights = grid
    if nodes[-1] * t_s < 200.0 * (1 - 1e-9) or nodes.size < 64:
        raise GridTooCoarse(f"grid must reach 200/t_s with enough modes (w_max t = {nodes[-1] * t_s:.3g})")
    amp = np.sqrt(spec.density(nodes) * weights / np.pi)
    ic, is_ = _toggle_projections(pulses, t_s, nodes)
    return amp * ic, amp * is_


def sample_colored_single(spec: SpectralModel, pulses: PulseSequence, t_s: float, n_traj: int,
                          seed: int, grid=None, threads: int = 1) -> TrajectoryEnsemble:
    """Single-qubit coherence under synthesized Gaussian 1/f^p noise.

    ``B(t) = sum_m sqrt(S(w_m) dw_m / pi) (X_m cos w_m t + Y_m sin w_m t)``
    with standard normal ``X, Y``. The toggled phase ``int F(t) B(t) dt`` is
    integrated exactly on each pulse-delimited segment. The estimate
    ``decay`` is ``E[cos(phase)]`` and targets ``exp(-zeta(t_s))``.
    """
    lc, ls = _mode_loadings(spec, pulses, t_s, grid)
    m = lc.size

    def block(rng, b, size):
        x = rng.standard_normal((size, 2 * m))
        phase = x[:, :m] @ lc + x[:, m:] @ ls
        return np.cos(phase)[:, None]

    mean, se = _run_blocks(n_traj, seed, block, threads)
    return TrajectoryEnsemble(n_traj, seed, None, [Estimate("decay", float(mean[0]), float(se[0]))])


def sample_colored_spatial(A_spatial: DephasingMatrix, spec: SpectralModel, pulses: PulseSequence,
                           t_s: float, n_traj: int, seed: int, state=None, grid=None,
                           threads: int = 1) -> TrajectoryEnsemble:
    """Register coherences under spatially mixed colored noise.

    ``B_j(t) = sum_m g_mj b_m(t)`` with independent processes ``b_m`` of
    spectrum ``xi |w|^-p`` and ``g`` the symmetric factor of ``A_spatial``.
    """
    n = A_spatial.n
    state = QubitRegisterState.ghz(n) if state is None else state
    rho0 = state.matrix if isinstance(state, QubitRegisterState) else np.asarray(state, dtype=complex)
    lc, ls = _mode_loadings(spec, pulses, t_s, grid)
    m = lc.size
    g = factor_sqrt(A_spatial).entries
    S = z_signs(n)
    r, c = _pairs(rho0)
    half_ds = 0.5 * (S[r] - S[c])

    def block(rng, b, size):
        x = rng.standard_normal((size, n, 2 * m))
        base = x[:, :, :m] @ lc + x[:, :, m:] @ ls  # (size, n) independent processes
        phases = base @ g  # phase_j = sum_m g_mj base_m
        return np.cos(phases @ half_ds.T)

    mean, se = _run_blocks(n_traj, seed, block, threads)
    decay = np.ones(rho0.shape)
    decay[r, c] = decay[c, r] = mean
    est = [Estimate(f"decay[{i},{j}]", float(mm), float(s)) for i, j, mm, s in zip(r, c, mean, se)]
    return TrajectoryEnsemble(n_traj, seed, None, est, rho0 * decay)


def fit_decay_exponent(t_values, decay_means) -> float:
    """Slope of ``log(-log(decay))`` against ``log t``; ``1 + p`` for stretched exponentials."""
    t = np.asarray(t_values, dtype=float)
    d = np.asarray(decay_means, dtype=float)
    return float(np.polyfit(np.log(t), np.log(-np.log(d)), 1)[0])


def lindblad_integrate(state, A: DephasingMatrix, gamma: float, t: float, dt: float,
                       generators=None) -> QubitRegisterState:
    """Classic RK4 on :func:`lindblad_rhs`; the step is shortened to divide ``t`` evenly.

    Raises
    ------
    StepTooCoarse
        If ``dt * gamma * lambda_max(A) > 0.01``.
    """
    lmax = float(np.linalg.eigvalsh(A.entries)[-1]) if A.n else 0.0
    if dt * gamma * lmax > 0.01 * (1 + 1e-12):
        raise StepTooCoarse(f"dt * gamma * lambda_max = {dt * gamma * lmax:.3g} > 0.01")
    rho = (state.matrix if isinstance(state, QubitRegisterState) else np.asarray(state, dtype=complex)).copy()
    if t == 0:
        return QubitRegisterState(rho)
    n_steps = int(math.ceil(t / dt - 1e-9))
    h = t / n_steps
    if generators is None:
        generators = dephasing_generators(rho.shape[0].bit_length() - 1)

    def f(r):
        return lindblad_rhs(r, A.entries, gamma, generators)

    for _ in range(n_steps):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return QubitRegisterState(rho)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    scale = max(abs(w[-1]), 1e-300)
    if w[0] < -1e-10 * scale:
        raise ValueError(f"density matrix has a negative eigenvalue ({w[0]:.3g})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def root_fidelity(rho, sigma) -> float:
    """``sqrt(F) = Tr|sqrt(rho) sqrt(sigma)|``, the nuclear norm of the product of roots."""
    return float(np.sum(np.linalg.svd(_psd_sqrt(rho) @ _psd_sqrt(sigma), compute_uv=False)))


def fidelity_qfi(rho_minus, rho_plus, d_xi: float) -> QfiResult:
    """QFI from the Bures distance between states at ``xi -+ d_xi``: ``8 (1 - sqrt F) / (2 d_xi)^2``."""
    if d_xi <= 0:
        raise ValueError("d_xi must be > 0")
    a = rho_minus.matrix if isinstance(rho_minus, QubitRegisterState) else np.asarray(rho_minus, dtype=complex)
    b = rho_plus.matrix if isinstance(rho_plus, QubitRegisterState) else np.asarray(rho_plus, dtype=complex)
    if np.array_equal(a, b):
        # the eigen-square-roots of a pure state leave ~1e-12 of roundoff in sqrt(F)
        _psd_sqrt(a)
        return QfiResult(0.0, QfiMethod.FIDELITY_FD)
    value = 8.0 * (1.0 - root_fidelity(a, b)) / (2.0 * d_xi) ** 2
    return QfiResult(max(value, 0.0), QfiMethod.FIDELITY_FD)


def fidelity_qfi_markovian(state, A: DephasingMatrix, t: float, xi: float,
                           rel_step: float = 1e-4) -> QfiResult:
    """Fidelity-difference QFI of ``evolve_markovian`` about the overall strength."""
    d = rel_step * xi
    lo = evolve_markovian(state, A.scaled((xi - d) / xi), t)
    hi = evolve_markovian(state, A.scaled((xi + d) / xi), t)
    return fidelity_qfi(lo, hi, d)
