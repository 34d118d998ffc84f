from __future__ import annotations

import numpy as np
import pytest

from entvol.states import BipartiteSplit

SPLIT22 = BipartiteSplit(2, 2)
SPLIT24 = BipartiteSplit(2, 4)


def bell_state() -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


def random_pure(n, rng):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def random_product_mixture(split: BipartiteSplit, k: int, rng) -> np.ndarray:
    """Separable by construction: a convex mixture of ``k`` product pure states."""
    w = rng.dirichlet(np.ones(k))
    rho = np.zeros((split.n, split.n), dtype=complex)
    for p in w:
        v = np.kron(random_pure(split.n_a, rng), random_pure(split.n_b, rng))
        rho += p * np.outer(v, v.conj())
    return rho


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
