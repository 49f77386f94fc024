import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from chiptrans.netcore import FrequencyGrid, TwoPortNetwork  # noqa: E402

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def random_passive(rng, n=16, z_ref=50.0, scale=0.7):
    """Random strictly passive two-port: singular values of S below ``scale``."""
    a = rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))
    norms = np.linalg.norm(a, ord=2, axis=(1, 2))
    s = a / norms[:, None, None] * scale
    grid = FrequencyGrid.linspace(1e9, 1e9 * n, n)
    return TwoPortNetwork(grid, s, z_ref)


def random_unitary_reciprocal(rng, n=16, z_ref=50.0):
    """Lossless reciprocal two-port: S = U diag(e^{j phi}) U^T with U real orthogonal."""
    s = np.empty((n, 2, 2), dtype=complex)
    for k in range(n):
        t = rng.uniform(0, 2 * np.pi)
        u = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        d = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)))
        s[k] = u @ d @ u.T
    grid = FrequencyGrid.linspace(1e9, 1e9 * n, n)
    return TwoPortNetwork(grid, s, z_ref)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=lambda k: int(k.split()[0][1:])):
        ok, detail = mod.RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
