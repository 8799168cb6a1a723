import numpy as np
import pytest
import scipy.linalg

from poissonlie.liealg import build_algebra

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def sl2():
    return build_algebra("sl_split", 1)


@pytest.fixture(scope="session")
def sl3():
    return build_algebra("sl_split", 2)


@pytest.fixture(scope="session")
def su2():
    return build_algebra("su_compact", 1)


@pytest.fixture(scope="session")
def su3():
    return build_algebra("su_compact", 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_group(alg, rng, scale=1.0):
    return scipy.linalg.expm(alg.to_matrix(rng.uniform(-scale, scale, alg.dim)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
