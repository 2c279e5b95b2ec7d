import numpy as np
import pytest

from qrecur import QuantumChannel, cue_unitary


def random_density(dim, rng, rank=None):
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_kraus_channel(dim, n_kraus, rng):
    """Generic non-unital channel: random operators rescaled to sum A^dag A = I."""
    g = rng.standard_normal((n_kraus, dim, dim)) + 1j * rng.standard_normal((n_kraus, dim, dim))
    s = np.einsum("kji,kjl->il", g.conj(), g)
    w, v = np.linalg.eigh(s)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return QuantumChannel([a @ inv_sqrt for a in g])


def random_unitary_mixture(dim, n_terms, rng):
    """Unital channel: convex mixture of Haar unitaries."""
    p = rng.dirichlet(np.ones(n_terms))
    return QuantumChannel([np.sqrt(pi) * cue_unitary(dim, rng) for pi in p])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
