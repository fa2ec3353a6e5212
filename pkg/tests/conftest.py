import numpy as np
import pytest

from qftlm.hamiltonian import build_tfim

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tfim2():
    return build_tfim(2)


@pytest.fixture(scope="session")
def tfim4():
    return build_tfim(4)


def random_state(rng, L):
    psi = rng.normal(size=2 ** L) + 1j * rng.normal(size=2 ** L)
    return psi / np.linalg.norm(psi)


def naive_dense(H):
    """Kronecker-product construction, independent of the bitmask path."""
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1.0, -1.0]),
    }
    out = np.zeros((H.dim, H.dim), dtype=complex)
    for coef, ps in H.terms:
        m = np.array([[1.0]])
        for c in ps.word:
            m = np.kron(m, mats[c])
        out += coef * m
    return out
