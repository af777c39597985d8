from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# Pauli matrices defined independently of the package, for oracle use.
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def correlation_tensor(matrix):
    """T[k, l] = Tr(ρ σ_k ⊗ σ_l) computed by direct Born-rule traces."""
    paulis = (SX, SY, SZ)
    return np.array([[np.trace(matrix @ np.kron(a, b)).real for b in paulis] for a in paulis])


def chsh_grid_max(matrix, step_deg=1.0):
    """Brute-force CHSH maximum over spin directions in the x-z plane.

    For fixed Alice directions (a, a') the CHSH sum splits into
    max_b [E(a,b) + E(a',b)] + max_b' [E(a,b') - E(a',b')], so the search is
    exhaustive over the angle grid for all four directions.
    """
    t = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    dirs = np.stack([np.sin(t), np.zeros_like(t), np.cos(t)], axis=1)
    e = dirs @ correlation_tensor(matrix) @ dirs.T
    best = -np.inf
    for i in range(len(t)):
        plus = (e[i][None, :] + e).max(axis=1)
        minus = (e[i][None, :] - e).max(axis=1)
        best = max(best, float((plus + minus).max()))
    return best


def pr_box(alpha, beta, gamma):
    """PR box with a XOR b = xy XOR alpha x XOR beta y XOR gamma."""
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    if a ^ b == (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma:
                        p[x, y, a, b] = 0.5
    return p


def random_local_model(rng, scenario, max_causes=5):
    from nonlocality.locality import LocalModel

    k = int(rng.integers(1, max_causes + 1))
    w = rng.dirichlet(np.ones(k))
    ra = rng.dirichlet(np.ones(scenario.outcomes_a), size=(k, scenario.settings_a))
    rb = rng.dirichlet(np.ones(scenario.outcomes_b), size=(k, scenario.settings_b))
    return LocalModel.from_unnormalized(scenario, w, ra, rb)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one PASS/FAIL line per acceptance criterion in the terminal summary
_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
