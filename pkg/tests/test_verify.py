import numpy as np
import pytest

from corrsense.verify import SUITES, Check, case_rng, random_psd, random_pure, report, run_suite


def test_check_line_format():
    c = Check("rate", 1.0, 1.0, 1e-12, True)
    assert c.line("demo") == "PASS demo/rate: value=1.0 target=1.0 tol=1e-12"
    assert report("demo", [c, Check("x", 2.0, 1.0, 0.1, False)]).splitlines()[1].startswith("FAIL demo/x")


def test_case_streams_are_independent_of_order():
    a = case_rng(7, 3).normal(size=4)
    case_rng(7, 2).normal(size=100)
    assert np.array_equal(case_rng(7, 3).normal(size=4), a)
    assert not np.array_equal(case_rng(7, 4).normal(size=4), a)


def test_random_generators_are_valid():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4):
        A = random_psd(rng, n, 1.5)
        assert np.linalg.eigvalsh(A.entries)[0] >= 0.1 - 1e-12 and A.gamma == 1.5
        st_ = random_pure(rng, n).validate()
        assert np.trace(st_.matrix @ st_.matrix).real == pytest.approx(1.0)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")
    assert set(SUITES) == {"lindblad", "mc-white", "mc-colored", "qfi-oracle", "filter"}


@pytest.mark.parametrize("name", ["qfi-oracle", "filter"])
def test_fast_suites_pass_for_other_seeds(name):
    checks = run_suite(name, seed=123)
    assert checks and all(c.passed for c in checks), report(name, [c for c in checks if not c.passed])
