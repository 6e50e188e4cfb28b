import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrsense.dynamics import (QubitRegisterState, coherence_exponents, dephasing_generators,
                                effective_time, evolve_markovian, evolve_spatiotemporal, ghz_ket,
                                lindblad_rhs, load_state_txt, markovian_xi_derivative, plus_product_ket,
                                save_state_txt, spatiotemporal_xi_derivative, z_signs)
from corrsense.errors import UnsupportedExponent
from corrsense.noise_model import DephasingMatrix, PowerLawSpatialModel, build_dephasing_matrix
from corrsense.pulse_filter import PulseSequence, SpectralModel, zeta_closed_form
from corrsense.verify import random_psd, random_pure

A3 = build_dephasing_matrix(PowerLawSpatialModel(3, 1.0, 1.0, 2.0))
ONE = DephasingMatrix(np.array([[2.0]]))


def test_sign_convention():
    np.testing.assert_array_equal(z_signs(2), [[1, 1], [1, -1], [-1, 1], [-1, -1]])


def test_single_qubit_coherence():
    out = evolve_markovian(QubitRegisterState.plus_product(1), ONE, 0.8).matrix
    assert out[0, 1] == pytest.approx(0.5 * math.exp(-0.4), rel=1e-14)
    assert out[0, 0] == QubitRegisterState.plus_product(1).matrix[0, 0]


def test_zero_time_is_identity():
    st_ = random_pure(np.random.default_rng(0), 3)
    assert np.array_equal(evolve_markovian(st_, A3, 0.0).matrix, st_.matrix)


def test_ghz_extreme_coherence_rate():
    q = coherence_exponents(A3)
    assert q[0, 7] == pytest.approx(11 / 4, rel=1e-15)
    t = 0.37
    out = evolve_markovian(QubitRegisterState.ghz(3), A3, t).matrix
    assert out[0, 7] == pytest.approx(0.5 * math.exp(-11 / 4 * t), rel=1e-14)


def test_gamma_scales_time():
    A = DephasingMatrix(A3.entries, 2.5)
    st_ = QubitRegisterState.ghz(3)
    np.testing.assert_allclose(evolve_markovian(st_, A, 0.2).matrix,
                               evolve_markovian(st_, A3, 0.5).matrix, rtol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        evolve_markovian(QubitRegisterState.ghz(2), A3, 0.1)
    with pytest.raises(ValueError):
        evolve_markovian(QubitRegisterState.ghz(3), A3, -0.1)


def test_state_validation():
    with pytest.raises(ValueError):
        QubitRegisterState(np.eye(3) / 3)
    with pytest.raises(ValueError):
        QubitRegisterState.from_ket(np.ones(4))
    with pytest.raises(ValueError):
        QubitRegisterState(np.diag([1.2, -0.2])).validate()
    mixed = QubitRegisterState(np.eye(4) / 4).validate()
    with pytest.raises(ValueError):
        mixed.ket()


def test_ket_round_trip():
    psi = ghz_ket(3) * np.exp(0.7j)
    back = QubitRegisterState.from_ket(psi).ket()
    assert abs(abs(np.vdot(back, psi)) - 1) < 1e-12
    np.testing.assert_allclose(np.abs(plus_product_ket(4)) ** 2, np.full(16, 1 / 16))


def test_rhs_examples():
    mixed = np.eye(8, dtype=complex) / 8
    assert np.max(np.abs(lindblad_rhs(mixed, A3, 1.0))) == 0.0
    d = lindblad_rhs(QubitRegisterState.plus_product(1), ONE, 1.0)
    assert d[0, 1] == pytest.approx(-0.25, rel=1e-15)
    rng = np.random.default_rng(3)
    h = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = h + h.conj().T
    out = lindblad_rhs(h, A3, 1.3)
    assert np.max(np.abs(out - out.conj().T)) < 1e-13
    assert abs(np.trace(out)) < 1e-12


def test_rhs_matches_closed_form_derivative():
    rng = np.random.default_rng(11)
    A = random_psd(rng, 3, 1.4)
    st_ = random_pure(rng, 3)
    h = 1e-6
    fd = (evolve_markovian(st_, A, h).matrix - evolve_markovian(st_, A, 0).matrix) / h
    # forward difference; the second-order term is O(h)
    assert np.max(np.abs(fd - lindblad_rhs(st_, A, 1.4))) < 1e-5


def test_generators_commute():
    h = dephasing_generators(3)
    for a in h:
        for b in h:
            assert np.max(np.abs(a @ b - b @ a)) == 0
        w = np.linalg.eigvalsh(a)
        assert w.max() - w.min() == 1.0


def test_hahn_unit_qubit_example():
    one = DephasingMatrix(np.array([[1.0]]))
    spec = SpectralModel(1.0, 0.6, 0.0)
    t = 1.3
    out = evolve_spatiotemporal(QubitRegisterState.plus_product(1), one, spec, PulseSequence.hahn(), t).matrix
    assert out[0, 1] == pytest.approx(0.5 * math.exp(-0.6 * t ** 2 * math.log(2) / (2 * math.pi)), rel=1e-13)


def test_spatiotemporal_reproduces_single_qubit_zeta():
    for seq, p in [(PulseSequence.fid(), 0.4), (PulseSequence.cpmg(3), 2.3), (PulseSequence.udd(2), 1.0)]:
        spec = SpectralModel(p, 1.7, 0.0)
        one = DephasingMatrix(np.array([[1.0]]))
        out = evolve_spatiotemporal(QubitRegisterState.plus_product(1), one, spec, seq, 0.9).matrix
        assert abs(out[0, 1]) == pytest.approx(0.5 * math.exp(-zeta_closed_form(spec, seq, 0.9)), rel=1e-12)


def test_white_noise_reduction():
    # C(0) = 1/2 for FID, so the effective Markovian time is 2 t / gamma
    spec = SpectralModel(0.0, 1.0, 0.0)
    fid = PulseSequence.fid()
    assert effective_time(spec, fid, 0.7) == pytest.approx(1.4, rel=1e-14)
    st_ = QubitRegisterState.ghz(3)
    np.testing.assert_allclose(evolve_spatiotemporal(st_, A3, spec, fid, 0.7).matrix,
                               evolve_markovian(st_, A3, 1.4).matrix, rtol=1e-13)


def test_spatiotemporal_window_and_zero_time():
    st_ = QubitRegisterState.ghz(3)
    with pytest.raises(UnsupportedExponent):
        evolve_spatiotemporal(st_, A3, SpectralModel(1.5, 1.0, 0.0), PulseSequence.fid(), 1.0)
    out = evolve_spatiotemporal(st_, A3, SpectralModel(1.5, 1.0, 0.0), PulseSequence.hahn(), 0.0)
    assert np.array_equal(out.matrix, st_.matrix)


def test_xi_derivatives_by_finite_difference():
    st_ = QubitRegisterState.ghz(3)
    xi, h, t = 1.3, 1e-6, 0.4
    A = A3.scaled(xi)
    fd = (evolve_markovian(st_, A3.scaled(xi + h), t).matrix
          - evolve_markovian(st_, A3.scaled(xi - h), t).matrix) / (2 * h)
    np.testing.assert_allclose(markovian_xi_derivative(st_, A, t, xi), fd, atol=1e-9)

    seq = PulseSequence.hahn()

    def rho(x):
        return evolve_spatiotemporal(st_, A3, SpectralModel(0.5, x, 0.0), seq, t).matrix

    fd = (rho(xi + h) - rho(xi - h)) / (2 * h)
    np.testing.assert_allclose(spatiotemporal_xi_derivative(st_, A3, SpectralModel(0.5, xi, 0.0), seq, t),
                               fd, atol=1e-9)


def test_state_text_round_trip(tmp_path):
    st_ = random_pure(np.random.default_rng(5), 3)
    save_state_txt(tmp_path / "s.txt", st_)
    assert np.array_equal(load_state_txt(tmp_path / "s.txt").matrix, st_.matrix)
    save_state_txt(tmp_path / "g.txt", QubitRegisterState.ghz(2), tol=1e-15)
    assert len((tmp_path / "g.txt").read_text().splitlines()) == 2 + 4


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 4), t1=st.floats(0, 2), t2=st.floats(0, 2))
def test_semigroup(seed, n, t1, t2):
    rng = np.random.default_rng(seed)
    A, st_ = random_psd(rng, n), random_pure(rng, n)
    two = evolve_markovian(evolve_markovian(st_, A, t1), A, t2).matrix
    np.testing.assert_allclose(two, evolve_markovian(st_, A, t1 + t2).matrix, atol=1e-12, rtol=0)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 4), t=st.floats(0, 3), dt=st.floats(0, 1))
def test_populations_fixed_and_coherences_shrink(seed, n, t, dt):
    rng = np.random.default_rng(seed)
    A, st_ = random_psd(rng, n), random_pure(rng, n)
    a = evolve_markovian(st_, A, t).matrix
    b = evolve_markovian(st_, A, t + dt).matrix
    assert np.array_equal(np.diag(a), np.diag(st_.matrix))
    assert np.all(np.abs(b) <= np.abs(a) + 1e-15)
    QubitRegisterState(b).validate(1e-12)
