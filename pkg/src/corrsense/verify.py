"""Oracle-versus-closed-form check batteries.

Each suite takes ``(seed, threads)`` and returns a list of :class:`Check`.
Every random draw comes from a generator keyed on ``(seed, case)``, and
Monte Carlo ensembles use the worker-independent block streams, so the
printed lines are identical for any thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .dynamics import (QubitRegisterState, effective_time, evolve_markovian, evolve_spatiotemporal,
                       ghz_ket, markovian_xi_derivative)
from .mc_oracle import (fidelity_qfi_markovian, fit_decay_exponent, increment_covariance_check,
                        lindblad_integrate, max_white_step, sample_colored_single,
                        sample_colored_spatial, sample_white_correlated)
from .noise_model import DephasingMatrix, PowerLawSpatialModel, build_dephasing_matrix
from .pulse_filter import (PulseSequence, SpectralModel, coefficient_closed_form,
                           filter_spectrum_integral, read_coefficient_csv, zeta_closed_form,
                           zeta_quadrature)
from .qfi import fq_short_time, optimal_entangled_rate, qfi_sld

SUITES = ("lindblad", "mc-white", "mc-colored", "qfi-oracle", "filter")


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: float
    tol: float
    passed: bool

    def line(self, suite: str) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {suite}/{self.name}: value={self.value!r} "
                f"target={self.target!r} tol={self.tol!r}")


def _rel(name, value, target, tol) -> Check:
    err = abs(value - target) / abs(target)
    return Check(name, float(value), float(target), tol, bool(err <= tol))


def _abs(name, value, target, tol) -> Check:
    return Check(name, float(value), float(target), tol, bool(abs(value - target) <= tol))


def _mc(name, est, target, n_sigma=3.0) -> Check:
    return Check(name, est.mean, float(target), n_sigma * est.stderr, est.within(target, n_sigma))


def case_rng(seed: int, case: int) -> np.random.Generator:
    return np.random.default_rng([seed, case])


def random_psd(rng, n: int, gamma: float = 1.0) -> DephasingMatrix:
    g = rng.normal(size=(n, n))
    return DephasingMatrix(g @ g.T / n + 0.1 * np.eye(n), gamma)


def random_pure(rng, n: int) -> QubitRegisterState:
    psi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return QubitRegisterState.from_ket(psi / np.linalg.norm(psi))


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def suite_lindblad(seed: int = 0, threads: int = 1) -> list:
    def rk4_case(k):
        rng = case_rng(seed, k)
        n = 1 + k % 4
        gamma = rng.uniform(0.5, 2.0)
        A = random_psd(rng, n, gamma)
        state = random_pure(rng, n)
        t = rng.uniform(0.05, 3.0) / gamma
        dt = 0.01 / (gamma * np.linalg.eigvalsh(A.entries)[-1])
        exact = evolve_markovian(state, A, t).matrix
        rk4 = lindblad_integrate(state, A, gamma, t, dt).matrix
        return _abs(f"rk4[{k}] N={n}", float(np.max(np.abs(exact - rk4))), 0.0, 1e-7)

    checks = _map(rk4_case, range(50), threads)

    A1 = build_dephasing_matrix(PowerLawSpatialModel(3, 0.7, 1.0, 2.0))
    spec = SpectralModel(0.6, 1.7, 0.0)
    hahn = PulseSequence.hahn()
    st = QubitRegisterState.ghz(3)
    rho_st = evolve_spatiotemporal(st, A1, spec, hahn, 0.4).matrix
    rho_mk = evolve_markovian(st, A1.scaled(spec.xi), effective_time(spec, hahn, 0.4)).matrix
    checks.append(_abs("spatiotemporal-effective-time", float(np.max(np.abs(rho_st - rho_mk))), 0.0, 1e-12))

    one = build_dephasing_matrix(PowerLawSpatialModel(1, 1.0, 1.0, 1.0))
    rho1 = evolve_spatiotemporal(QubitRegisterState.plus_product(1), one, spec, hahn, 0.4).matrix
    target = 0.5 * math.exp(-zeta_closed_form(spec, hahn, 0.4))
    checks.append(_rel("single-qubit-coherence", abs(rho1[0, 1]), target, 1e-12))
    return checks


def suite_mc_white(seed: int = 0, threads: int = 1) -> list:
    checks = []
    A3 = build_dephasing_matrix(PowerLawSpatialModel(3, 1.0, 1.0, 2.0))
    err, bound = increment_covariance_check(A3, 1.0, 1e-3, 200_000, seed)
    checks.append(Check("increment-covariance", err, 0.0, bound, bool(err <= bound)))

    A1 = DephasingMatrix(np.array([[2.0]]))
    ens = sample_white_correlated(A1, 1.0, 1.0, max_white_step(A1, 1.0), 100_000, seed,
                                  QubitRegisterState.plus_product(1), threads)
    checks.append(_mc("N=1 coherence", ens["decay[0,1]"], math.exp(-0.5)))

    t = 0.3
    ens = sample_white_correlated(A3, 1.0, t, max_white_step(A3, 1.0), 100_000, seed + 1,
                                  None, threads)
    target = 2.0 * abs(evolve_markovian(QubitRegisterState.ghz(3), A3, t).matrix[0, -1])
    checks.append(_mc("N=3 GHZ coherence", ens["decay[0,7]"], target))
    return checks


COLORED_ZETAS = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
COLORED_TRAJ = 20_000


def suite_mc_colored(seed: int = 0, threads: int = 1) -> list:
    checks = []
    hahn = PulseSequence.hahn()
    for i, p in enumerate((0.5, 1.0)):
        C = coefficient_closed_form(hahn, p).value
        ts, means = [], []
        for k, z in enumerate(COLORED_ZETAS):
            t = (z / C) ** (1.0 / (1.0 + p))
            spec = SpectralModel(p, 1.0, 1e-6 / t)
            est = sample_colored_single(spec, hahn, t, COLORED_TRAJ, seed + 100 * i + k,
                                        threads=threads)["decay"]
            checks.append(_mc(f"hahn p={p} zeta={z}", est, math.exp(-zeta_closed_form(spec, hahn, t))))
            ts.append(t)
            means.append(est.mean)
        checks.append(_abs(f"hahn p={p} decay exponent", fit_decay_exponent(ts, means), 1.0 + p, 0.05))

    fid = PulseSequence.fid()
    spec = SpectralModel(0.0, 1.0, 1e-6)
    est = sample_colored_single(spec, fid, 1.0, COLORED_TRAJ, seed + 300, threads=threads)["decay"]
    checks.append(_mc("fid p=0 white limit", est, math.exp(-zeta_closed_form(spec, fid, 1.0))))

    A_sp = build_dephasing_matrix(PowerLawSpatialModel(2, 0.5, 1.0, 1.0))
    spec = SpectralModel(1.0, 1.0, 1e-6)
    t = 0.8
    ens = sample_colored_spatial(A_sp, spec, hahn, t, COLORED_TRAJ, seed + 400, threads=threads)
    target = 2.0 * abs(evolve_spatiotemporal(QubitRegisterState.ghz(2), A_sp, spec, hahn, t).matrix[0, -1])
    checks.append(_mc("spatial N=2 GHZ coherence", ens["decay[0,3]"], target))
    return checks


def _sld_rate(state, A, h, xi):
    return qfi_sld(evolve_markovian(state, A, h), markovian_xi_derivative(state, A, h, xi)).value / h


def suite_qfi_oracle(seed: int = 0, threads: int = 1) -> list:
    checks = []
    A3 = build_dephasing_matrix(PowerLawSpatialModel(3, 1.0, 1.0, 2.0))
    checks.append(_rel("N=3 GHZ rate", fq_short_time(QubitRegisterState.ghz(3), A3, 1.0, 1.0), 1.375, 1e-12))
    checks.append(_rel("N=3 product rate", fq_short_time(QubitRegisterState.plus_product(3), A3, 1.0, 1.0),
                       0.75, 1e-12))

    plus = QubitRegisterState.plus_product(1).matrix
    gen = np.diag([0.5, -0.5]).astype(complex)
    checks.append(_rel("phase QFI of |+>", qfi_sld(plus, -1j * (gen @ plus - plus @ gen)).value, 1.0, 1e-12))

    # fast-reset attainability: Richardson-extrapolated F_Q(t)/t against the rate formula
    xi, gamma, h = 1.3, 0.8, 1e-3
    for n in (2, 3, 4):
        A = build_dephasing_matrix(PowerLawSpatialModel(n, 0.7, xi, 2.0), gamma)
        for label, st in (("GHZ", QubitRegisterState.ghz(n)), ("product", QubitRegisterState.plus_product(n))):
            rate = fq_short_time(st, A, gamma, xi)
            rich = 2.0 * _sld_rate(st, A, h / 2, xi) - _sld_rate(st, A, h, xi)
            checks.append(_rel(f"attainability {label} N={n}", rich, rate, 1e-3))

    def fidelity_case(k):
        rng = case_rng(seed, 1000 + k)
        n = 1 + k % 3
        A = random_psd(rng, n)
        st = random_pure(rng, n)
        t = rng.uniform(0.1, 3.0)
        sld = qfi_sld(evolve_markovian(st, A, t), markovian_xi_derivative(st, A, t, 1.0)).value
        fid = fidelity_qfi_markovian(st, A, t, 1.0, rel_step=1e-3).value
        return _rel(f"sld-vs-fidelity[{k}] N={n}", sld, fid, 1e-4)

    checks.extend(_map(fidelity_case, range(20), threads))

    A2 = build_dephasing_matrix(PowerLawSpatialModel(2, 0.5, 1.0, 2.0))
    st = QubitRegisterState.ghz(2)
    sld = qfi_sld(evolve_markovian(st, A2, 0.5), markovian_xi_derivative(st, A2, 0.5, 1.0)).value
    checks.append(_rel("GHZ N=2 fidelity step 1e-4", sld, fidelity_qfi_markovian(st, A2, 0.5, 1.0).value, 1e-4))

    for n in (4, 8, 12):
        A = build_dephasing_matrix(PowerLawSpatialModel(n, 0.5, 1.0, 2.0))
        bound = optimal_entangled_rate(A, 1.0, 1.0, check_ghz=False)
        checks.append(_rel(f"GHZ attains bound N={n}", fq_short_time(ghz_ket(n), A, 1.0, 1.0),
                           bound, 1e-12))
    return checks


def random_sequence(rng, k_max: int = 6) -> PulseSequence:
    K = int(rng.integers(1, k_max + 1))
    thetas = np.sort(rng.uniform(0.02, 0.98, K))
    while np.any(np.diff(thetas) < 1e-3):
        thetas = np.sort(rng.uniform(0.02, 0.98, K))
    return PulseSequence(tuple(thetas.tolist()))


def golden_coefficients() -> list:
    path = resources.files("corrsense") / "data" / "coefficients_golden.csv"
    with resources.as_file(path) as p:
        return read_coefficient_csv(p)


def suite_filter(seed: int = 0, threads: int = 1) -> list:
    hahn, fid = PulseSequence.hahn(), PulseSequence.fid()
    checks = [
        _abs("C_FID(0)", coefficient_closed_form(fid, 0.0).value, 0.5, 1e-9),
        _abs("C_FID(1e-10)", coefficient_closed_form(fid, 1e-10).value, 0.5, 1e-9),
        _abs("C_Hahn(1)", coefficient_closed_form(hahn, 1.0).value, math.log(2.0) / (2.0 * math.pi), 1e-9),
        _abs("C_Hahn(2)", coefficient_closed_form(hahn, 2.0).value, 1.0 / 24.0, 1e-9),
    ]
    for seq in (hahn, PulseSequence.cpmg(2)):
        for p in (0.5, 1.0, 2.0):
            spec = SpectralModel(p, 1.0, 1e-6)
            checks.append(_rel(f"quadrature {seq.label()} p={p}", zeta_quadrature(spec, seq, 1.0),
                               zeta_closed_form(spec, seq, 1.0), 1e-3))

    def sum_rule(k):
        rng = case_rng(seed, 2000 + k)
        seq = random_sequence(rng)
        t_s = float(rng.uniform(0.2, 5.0))
        white = SpectralModel(0.0, 1.0, 0.0)
        # |F|^2 is even in w, so the full-line integral over 2 pi is the half-line one over pi
        total = filter_spectrum_integral(seq, t_s, white) / math.pi
        return _rel(f"sum rule[{k}] K={seq.K}", total, t_s, 1e-6)

    checks.extend(_map(sum_rule, range(10), threads))

    for K, thetas, p, C in golden_coefficients():
        value = coefficient_closed_form(PulseSequence(thetas), p).value
        checks.append(_rel(f"golden K={K} {';'.join(f'{x:.4g}' for x in thetas)} p={p}", value, C, 1e-9))
    return checks


_RUNNERS = {
    "lindblad": suite_lindblad,
    "mc-white": suite_mc_white,
    "mc-colored": suite_mc_colored,
    "qfi-oracle": suite_qfi_oracle,
    "filter": suite_filter,
}


def run_suite(name: str, seed: int = 0, threads: int = 1) -> list:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return _RUNNERS[name](seed, threads)


def report(name: str, checks) -> str:
    return "\n".join(c.line(name) for c in checks)
