"""Filter functions and dephasing coefficients for pi-pulse sequences under 1/f^p noise.

A sequence of instantaneous pi pulses at fractional times ``theta_j`` flips the
sign of the toggling function ``F(t)``. For a power-law spectrum
``S(w) = xi |w|^-p`` the decay exponent of the qubit coherence is
``zeta(t) = xi t^(1+p) C``, with ``C`` fixed by the sequence and ``p``.

Conventions
-----------
The toggling function starts at ``+1``. Writing the segment edges as
``tau = (0, theta_1, ..., theta_K, 1) * t`` with weights
``c = (-1, 2, -2, ..., (-1)^K)``, the filter function is
``F[w] = sum_k c_k exp(i w tau_k) / (i w)`` and

    C = -sum_{k<k'} c_k c_k' |tau_k - tau_k'|^(1+p) / (2 cos(p pi/2) Gamma(2+p)),

which is the reflection-formula rewrite of ``Gamma(-1-p) sin(p pi/2) / pi``
times the sequence bracket.
"""
from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import CutoffRegimeWarning, PoleError, UnsupportedExponent

POLE_SWITCH = 1e-6
BALANCE_TOL = 1e-12
CUTOFF_WARN = 0.01
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PulseSequence:
    """Fractional pulse times ``0 < theta_1 < ... < theta_K < 1``; empty means FID."""

    thetas: tuple = ()

    def __post_init__(self):
        th = tuple(float(x) for x in self.thetas)
        if any(not (0.0 < x < 1.0) for x in th):
            raise ValueError(f"pulse fractions must lie in (0, 1), got {th}")
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError(f"pulse fractions must be strictly increasing, got {th}")
        object.__setattr__(self, "thetas", th)

    @classmethod
    def fid(cls) -> "PulseSequence":
        return cls(())

    @classmethod
    def hahn(cls) -> "PulseSequence":
        return cls((0.5,))

    @classmethod
    def cpmg(cls, k: int) -> "PulseSequence":
        return cls(tuple((j - 0.5) / k for j in range(1, k + 1)))

    @classmethod
    def udd(cls, k: int) -> "PulseSequence":
        return cls(tuple(math.sin(math.pi * j / (2 * k + 2)) ** 2 for j in range(1, k + 1)))

    @property
    def K(self) -> int:
        return len(self.thetas)

    def edges(self, t_s: float = 1.0) -> np.ndarray:
        return np.r_[0.0, self.thetas, 1.0] * t_s

    def weights(self) -> np.ndarray:
        K = self.K
        return np.r_[-1.0, [2.0 * (-1.0) ** j for j in range(K)], (-1.0) ** K]

    def dc_weight(self) -> float:
        """``F[0] / t_s``: signed fraction of time spent in the + toggling state."""
        L = np.diff(self.edges())
        return float(np.sum(L * (-1.0) ** np.arange(L.size)))

    @property
    def balanced(self) -> bool:
        return abs(self.dc_weight()) < BALANCE_TOL

    def max_exponent(self) -> float:
        """Upper end of the cutoff-agnostic window: 3 if DC is cancelled, else 1."""
        return 3.0 if self.balanced else 1.0

    def label(self) -> str:
        return ";".join(f"{x:.12g}" for x in self.thetas)


class CutoffShape(enum.Enum):
    FLATTEN_BELOW = "flatten"
    HARD_ZERO = "hard"


@dataclass(frozen=True)
class SpectralModel:
    """Power-law spectrum ``xi |w|^-p`` regularized below ``omega_cut``.

    ``omega_cut = 0`` gives the bare power law, which is integrable whenever
    ``p`` lies inside the sequence's window.
    """

    p: float
    xi: float = 1.0
    omega_cut: float = 1e-6
    cutoff_shape: CutoffShape = CutoffShape.FLATTEN_BELOW

    def __post_init__(self):
        if not -1.0 < self.p < 3.0:
            raise UnsupportedExponent(f"p must lie in (-1, 3), got {self.p}")
        if self.xi <= 0:
            raise ValueError("xi must be > 0")
        if self.omega_cut < 0:
            raise ValueError("omega_cut must be >= 0")
        object.__setattr__(self, "cutoff_shape", CutoffShape(self.cutoff_shape))

    def density(self, omega) -> np.ndarray:
        w = np.abs(np.asarray(omega, dtype=float))
        wc = self.omega_cut
        if wc == 0.0:
            with np.errstate(divide="ignore"):
                return self.xi * w ** (-self.p)
        if self.cutoff_shape is CutoffShape.FLATTEN_BELOW:
            return self.xi * np.maximum(w, wc) ** (-self.p)
        return np.where(w < wc, 0.0, self.xi * np.maximum(w, wc) ** (-self.p))


@dataclass(frozen=True)
class DephasingCoefficient:
    value: float
    sequence: PulseSequence
    p: float


def check_exponent(pulses: PulseSequence, p: float) -> None:
    """Raise :class:`UnsupportedExponent` unless ``p`` is in the sequence's window."""
    hi = pulses.max_exponent()
    if not -1.0 < p < hi:
        kind = "FID" if pulses.K == 0 else ("balanced" if hi == 3.0 else "DC-unbalanced")
        raise UnsupportedExponent(
            f"p={p} outside the cutoff-agnostic window (-1, {hi:g}) for a {kind} sequence"
        )


def filter_function(pulses: PulseSequence, t_s: float, omega):
    """Fourier transform of the toggling function, ``int_0^t F(t') e^{i w t'} dt'``.

    Evaluated segment by segment as ``L e^{i w m} sinc(w L / 2)``, which is
    finite at ``w = 0`` (the DC value ``t_s * dc_weight``).
    """
    if t_s <= 0:
        raise ValueError("t_s must be > 0")
    w = np.asarray(omega, dtype=float)
    e = pulses.edges(t_s)
    a, b = e[:-1], e[1:]
    L = b - a
    s = (-1.0) ** np.arange(L.size)
    ww = w[..., None]
    terms = s * L * np.exp(0.5j * ww * (a + b)) * np.sinc(ww * L / (2.0 * np.pi))
    return terms.sum(axis=-1)


def _pair_terms(pulses: PulseSequence):
    """Pairwise separations and the coefficients ``-c_k c_k'`` of the sequence bracket."""
    tau = pulses.edges()
    c = pulses.weights()
    i, j = np.triu_indices(tau.size, k=1)
    return tau[j] - tau[i], -c[i] * c[j]


def sequence_bracket(pulses: PulseSequence, p: float, derivative: int = 0) -> float:
    """``-sum_{k<k'} c_k c_k' d^(1+p)`` or its ``derivative``-th p-derivative."""
    d, w = _pair_terms(pulses)
    lnd = np.log(d)
    return float(np.sum(w * d ** (1.0 + p) * lnd ** derivative))


def coefficient_closed_form(pulses: PulseSequence, p: float) -> DephasingCoefficient:
    """Closed-form dephasing coefficient ``C`` with the removable pole at ``p = 1`` resolved.

    Within ``1e-6`` of ``p = 1`` (DC-balanced sequences only) the numerator
    and ``cos(p pi / 2)`` are both expanded about the pole; the numerator
    carries four Taylor terms.

    Raises
    ------
    PoleError
        For DC-unbalanced sequences (FID included) at ``p = 1``.
    UnsupportedExponent
        For ``p`` outside the sequence's window.
    """
    if not pulses.balanced and abs(p - 1.0) < POLE_SWITCH:
        raise PoleError(f"dephasing coefficient diverges at p={p} for a DC-unbalanced sequence")
    check_exponent(pulses, p)
    eps = p - 1.0
    if abs(eps) < POLE_SWITCH:
        num = sum(eps ** (n - 1) * sequence_bracket(pulses, 1.0, n) / math.factorial(n)
                  for n in range(1, 5))
        # cos(p pi/2) = -sin(eps pi/2) = -(pi/2) eps sinc(eps/2)
        value = -num / (math.pi * float(np.sinc(eps / 2.0)) * gamma_fn(3.0 + eps))
    else:
        value = sequence_bracket(pulses, p) / (2.0 * math.cos(p * math.pi / 2.0) * gamma_fn(2.0 + p))
    return DephasingCoefficient(float(value), pulses, p)


def zeta_closed_form(spec: SpectralModel, pulses: PulseSequence, t_s: float) -> float:
    """Decay exponent ``xi t^(1+p) C`` in the cutoff-agnostic regime."""
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    if t_s == 0:
        return 0.0
    if spec.omega_cut * t_s >= CUTOFF_WARN:
        warnings.warn(
            f"omega_cut * t_s = {spec.omega_cut * t_s:.3g} >= {CUTOFF_WARN}; "
            "closed form ignores the cutoff", CutoffRegimeWarning, stacklevel=2)
    C = coefficient_closed_form(pulses, spec.p).value
    return spec.xi * t_s ** (1.0 + spec.p) * C


def filter_spectrum_integral(pulses: PulseSequence, t_s: float, spec: SpectralModel,
                             rtol: float = 1e-10) -> float:
    """``int_0^inf |F[w]|^2 S(w) dw`` by panelled Gauss-Kronrod plus an exact-oscillation tail.

    Panels split at the cutoff, at decades between the cutoff and ``1/t_s``,
    and at the first ``K+2`` multiples of ``2 pi / t_s``. Beyond
    ``Omega = max(4 pi (K+2) / t_s, 2 omega_cut)`` the spectrum is a pure
    power law and ``|F|^2 w^2`` is a finite cosine series, so each cosine
    term goes to QUADPACK's Fourier-integral routine and the constant term
    is integrated analytically.
    """
    if t_s <= 0:
        raise ValueError("t_s must be > 0")
    K = pulses.K
    wc = spec.omega_cut
    p = spec.p
    omega_tail = max(4.0 * np.pi * (K + 2) / t_s, 2.0 * wc)

    breaks = {0.0, omega_tail}
    breaks.update(2.0 * np.pi * k / t_s for k in range(1, K + 3))
    if wc > 0:
        breaks.add(wc)
        if wc < 1.0 / t_s:
            n_dec = int(math.ceil(math.log10(1.0 / (wc * t_s)))) + 1
            breaks.update(np.geomspace(wc, 1.0 / t_s, n_dec + 1).tolist())
    else:
        breaks.update((10.0 ** -np.arange(1, 9) / t_s).tolist())
    breaks = sorted(b for b in breaks if b <= omega_tail)

    def integrand(w):
        return float(np.abs(filter_function(pulses, t_s, w)) ** 2 * spec.density(w))

    # high panels first: they dominate and set the absolute tolerance for the rest
    panels = sorted(zip(breaks[:-1], breaks[1:]), key=lambda ab: -ab[1])
    pieces = []
    for a, b in panels:
        floor = rtol * 1e-3 * abs(sum(pieces)) if pieces else 0.0
        val, _ = quad(integrand, a, b, epsabs=floor, epsrel=rtol, limit=400)
        pieces.append(val)
    low = math.fsum(pieces)

    tau = pulses.edges(t_s)
    c = pulses.weights()
    xi = spec.xi
    tail = xi * float(np.sum(c ** 2)) * omega_tail ** (-1.0 - p) / (1.0 + p)
    scale = max(abs(tail), abs(low), np.finfo(float).tiny)
    # group equal separations (CPMG repeats them)
    by_sep: dict = {}
    i, j = np.triu_indices(tau.size, k=1)
    for k1, k2 in zip(i, j):
        key = round(float(tau[k2] - tau[k1]), 13)
        by_sep[key] = by_sep.get(key, 0.0) + 2.0 * c[k1] * c[k2]
    for sep, coeff in sorted(by_sep.items()):
        if coeff == 0.0:
            continue
        val, _ = quad(lambda w: xi * w ** (-2.0 - p), omega_tail, np.inf,
                      weight="cos", wvar=sep, epsabs=rtol * scale * 1e-3, limlst=200)
        tail += coeff * val
    return low + tail


def zeta_quadrature(spec: SpectralModel, pulses: PulseSequence, t_s: float,
                    rtol: float = 1e-6) -> float:
    """``(1/4 pi) int |F|^2 S dw`` over the whole real line, by numerical quadrature."""
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    if t_s == 0:
        return 0.0
    total = filter_spectrum_integral(pulses, t_s, spec, rtol=min(rtol, 1e-8))
    return max(total / (2.0 * np.pi), 0.0)


def g_of_y(y, p: float):
    """Rescaled time-averaged QFI ``y^((1+2p)/(1+p)) / (e^{2y} - 1)``; the ``y = 0`` limit is exact."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("y must be >= 0")
    k = (1.0 + 2.0 * p) / (1.0 + p)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = y ** k / np.expm1(2.0 * y)
    at0 = 0.5 if p == 0 else (0.0 if p > 0 else np.inf)
    out = np.where(y == 0, at0, out)
    return out[()] if out.ndim == 0 else out


def golden_section_max(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 500):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_shot_time(spec: SpectralModel, pulses: PulseSequence, C) -> tuple:
    """Optimal per-shot time for the coherence family ``exp(-xi t^(1+p) C)``.

    ``C`` may be a :class:`DephasingCoefficient` or a plain number (e.g. an
    effective coefficient that already includes a multi-qubit form factor).

    Returns
    -------
    (y0, t_opt, max_rate)
        ``y0 = argmax g``, ``t_opt = (y0 / (xi C))^(1/(1+p))`` and the optimal
        time-averaged QFI ``xi^(-(1+2p)/(1+p)) C^(1/(1+p)) g(y0)``.
        For ``p = 0`` the optimum is the fast-reset limit ``y0 = t_opt = 0``.
    """
    C = C.value if isinstance(C, DephasingCoefficient) else float(C)
    p, xi = spec.p, spec.xi
    check_exponent(pulses, p)
    if p < 0:
        raise UnsupportedExponent("time-averaged QFI is unbounded as t -> 0 for p < 0")
    if C <= 0:
        raise ValueError("dephasing coefficient must be > 0")
    if p == 0:
        y0 = 0.0
        gmax = 0.5
    else:
        y0, gmax = golden_section_max(lambda y: float(g_of_y(y, p)), 0.0, 5.0)
    t_opt = (y0 / (xi * C)) ** (1.0 / (1.0 + p))
    rate = xi ** (-(1.0 + 2.0 * p) / (1.0 + p)) * C ** (1.0 / (1.0 + p)) * gmax
    return y0, t_opt, rate


def single_qubit_qfi(spec: SpectralModel, pulses: PulseSequence, t_s: float) -> float:
    """Per-shot QFI about ``xi`` of a qubit whose coherence decays as ``exp(-xi t^(1+p) C)``."""
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    if t_s == 0:
        return 0.0
    C = coefficient_closed_form(pulses, spec.p).value
    u = t_s ** (1.0 + spec.p) * C
    x = 2.0 * spec.xi * u
    return u * u * math.exp(-x) / -math.expm1(-x)


def coefficient_table(sequences: Sequence[PulseSequence], ps: Sequence[float]) -> list:
    """Rows ``(K, thetas, p, C)`` for every valid (sequence, p) pair."""
    rows = []
    for seq in sequences:
        for p in ps:
            try:
                C = coefficient_closed_form(seq, p).value
            except UnsupportedExponent:
                continue
            rows.append((seq.K, seq.thetas, float(p), C))
    return rows


def write_coefficient_csv(path, rows) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", "thetas", "p", "C"])
        for K, thetas, p, C in rows:
            w.writerow([K, ";".join(f"{x:.12g}" for x in thetas), f"{p:.12g}", f"{C:.12g}"])


def read_coefficient_csv(path) -> list:
    rows = []
    with open(Path(path), newline="") as fh:
        for rec in csv.DictReader(fh):
            thetas = tuple(float(x) for x in rec["thetas"].split(";") if x)
            rows.append((int(rec["K"]), thetas, float(rec["p"]), float(rec["C"])))
    return rows
