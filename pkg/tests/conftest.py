import itertools
import math
import warnings

import numpy as np
import pytest

from cyclemix.chain import ChainParams, TransitionMatrix, build_homogeneous, is_feasible
from cyclemix.topology import generate, long_range_count, max_long_range_degree

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


# ---------------------------------------------------------------------------
# brute-force oracles, written against the definitions with dense arrays


def brute_phi(D: np.ndarray, S) -> float:
    """Flow across the cut over pi(S) pi(S^c), uniform pi, plain loops."""
    n = D.shape[0]
    S = set(S)
    q = sum(D[i, j] for i in S for j in range(n) if j not in S) / n
    k = len(S)
    return q / ((k / n) * ((n - k) / n))


def brute_conductance(D: np.ndarray):
    """(value, smallest tied set) over all proper cuts; ties within 1e-12 relative."""
    n = D.shape[0]
    vals = [(brute_phi(D, S), S) for k in range(1, n)
            for S in itertools.combinations(range(n), k)]
    best = min(v for v, _ in vals)
    return best, min(S for v, S in vals if v <= best * (1 + 1e-12))


def dense_tmix(D: np.ndarray, eps: float, max_steps: int = 100000) -> int:
    """Worst point-mass mixing time from explicit matrix powers."""
    n = D.shape[0]
    M = np.eye(n)
    for k in range(max_steps + 1):
        if (0.5 * np.abs(M - 1.0 / n).sum(axis=1)).max() <= eps:
            return k
        M = M @ D
    raise AssertionError("no convergence")


def random_chain(rng: np.random.Generator, n_range=(6, 14), models=("M1", "M2", "M3"),
                 alpha_range=(1.3, 1.9), reversible=None):
    """Random feasible homogeneous chain; returns (graph, params, P)."""
    while True:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        model = str(rng.choice(models))
        alpha = float(rng.uniform(*alpha_range))
        if model == "M1" and 2 * long_range_count(n, alpha) > n:
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                g = generate(model, n, alpha, rng)
        except Exception:
            continue
        q_c = float(rng.uniform(0.05, 0.3))
        if reversible is True:
            r = 0.0
        elif reversible is False:
            r = float(rng.uniform(0.2, 0.9)) * q_c
        else:
            r = float(rng.uniform(0, q_c))
        q_l = float(rng.uniform(0, 0.4))
        d = max(1, max_long_range_degree(g))
        p = ChainParams(q_c, q_l, r, d)
        if is_feasible(g, p):
            return g, p, build_homogeneous(g, p)


def cycle_matrix(n: int, q_c: float, r: float = 0.0) -> TransitionMatrix:
    D = np.zeros((n, n))
    for i in range(n):
        D[i, (i + 1) % n] += q_c + r
        D[i, (i - 1) % n] += q_c - r
        D[i, i] += 1 - 2 * q_c
    return TransitionMatrix.from_dense(D)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
