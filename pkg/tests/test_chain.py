import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclemix.chain import (
    ChainParams,
    TransitionMatrix,
    build_homogeneous,
    format_matrix,
    is_doubly_stochastic,
    is_feasible,
    is_lazy,
    is_reversible,
    parse_matrix,
    read_matrix,
    reversibilize,
    write_matrix,
)
from cyclemix.errors import InfeasibleParamsError, InvalidParameterError, PreconditionError
from cyclemix.topology import LongRangeGraph, generate_m1, generate_m2, max_long_range_degree

from conftest import brute_phi, cycle_matrix, random_chain


def test_plain_cycle_symmetric_walk():
    D = build_homogeneous(LongRangeGraph(6, ()), ChainParams(0.25, 0.0)).dense()
    for i in range(6):
        assert D[i, (i + 1) % 6] == 0.25
        assert D[i, (i - 1) % 6] == 0.25
        assert D[i, i] == 0.5


def test_hand_worked_row():
    P = build_homogeneous(LongRangeGraph(4, ((0, 2),)), ChainParams(0.2, 0.2, r=0.1, d=4))
    row = P.dense()[0]
    assert row == pytest.approx([0.55, 0.3, 0.05, 0.1], abs=1e-15)
    assert dict(P.row(0)) == pytest.approx({1: 0.3, 2: 0.05, 3: 0.1})


def test_chord_on_cycle_edge_adds_mass():
    P = build_homogeneous(LongRangeGraph(5, ((0, 1),)), ChainParams(0.2, 0.1, d=1))
    D = P.dense()
    assert D[0, 1] == pytest.approx(0.3) and D[1, 0] == pytest.approx(0.3)
    assert is_doubly_stochastic(P)


def test_column_sums_on_random_m2(rng):
    for _ in range(100):
        n = int(rng.integers(20, 400))
        g = generate_m2(n, float(rng.uniform(1.2, 1.9)), rng)
        p = ChainParams(0.2, 0.1, r=float(rng.uniform(0, 0.2)), d=max(1, max_long_range_degree(g)))
        P = build_homogeneous(g, p)
        assert np.abs(P.col_sums() - 1).max() <= 1e-12
        assert np.abs(P.row_sums() - 1).max() <= 1e-12


def test_long_range_entries_ignore_drift(rng):
    g = generate_m2(200, 1.5, rng)
    P = build_homogeneous(g, ChainParams(0.2, 0.1, r=0.15, d=4))
    D = P.dense()
    for u, v in g.edges:
        if (v - u) % 200 not in (1, 199):
            assert D[u, v] == D[v, u] == pytest.approx(0.025)


def test_infeasible_build():
    g = LongRangeGraph(10, ((0, 5),))
    with pytest.raises(InfeasibleParamsError):
        build_homogeneous(g, ChainParams(0.5, 0.1, d=1))


def test_lazy_flag_is_enforced():
    g = LongRangeGraph(10, ((0, 5),))
    with pytest.raises(InfeasibleParamsError):
        build_homogeneous(g, ChainParams(0.3, 0.0, lazy=True))
    assert is_lazy(build_homogeneous(g, ChainParams(0.2, 0.1, lazy=True)))


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        ChainParams(-0.1, 0.1)
    with pytest.raises(InvalidParameterError):
        ChainParams(0.1, 0.1, r=0.2)
    with pytest.raises(InvalidParameterError):
        ChainParams(0.1, -0.1)
    with pytest.raises(InvalidParameterError):
        ChainParams(0.1, 0.1, d=0.5)
    assert ChainParams.for_alpha(1.5).d == 4


def test_feasibility_examples(rng):
    for _ in range(20):
        g = generate_m2(int(rng.integers(20, 300)), 1.5, rng)
        assert is_feasible(g, ChainParams(0.2, 0.4, d=max(1, max_long_range_degree(g))))
    assert not is_feasible(LongRangeGraph(10, ((0, 5),)), ChainParams(0.5, 0.1, d=1))
    assert is_feasible(generate_m1(100, 1.5, 0), ChainParams(0.25, 0.5, d=1))


def test_laziness_examples():
    assert is_lazy(cycle_matrix(8, 0.25))
    assert not is_lazy(cycle_matrix(8, 0.3))


def test_laziness_guarantee(rng):
    for _ in range(100):
        g = generate_m2(int(rng.integers(10, 300)), float(rng.uniform(1.2, 1.9)), rng)
        q_c = float(rng.uniform(0, 0.25))
        q_l = float(rng.uniform(0, 0.5 - 2 * q_c))
        p = ChainParams(q_c, q_l, r=float(rng.uniform(0, q_c)), d=max(1, max_long_range_degree(g)))
        assert is_lazy(build_homogeneous(g, p))


def test_doubly_stochastic_checks():
    D = cycle_matrix(6, 0.2).dense()
    D[2] *= 0.9
    assert not is_doubly_stochastic(TransitionMatrix.from_dense(D))
    perm = np.eye(5)[[3, 0, 4, 1, 2]]
    assert is_doubly_stochastic(TransitionMatrix.from_dense(perm))
    assert not is_doubly_stochastic(TransitionMatrix.from_dense([[1.5, -0.5], [-0.5, 1.5]]))


def test_reversibility_examples(rng):
    for _ in range(20):
        g = generate_m2(int(rng.integers(10, 200)), 1.5, rng)
        d = max(1, max_long_range_degree(g))
        assert is_reversible(build_homogeneous(g, ChainParams(0.2, 0.1, d=d)))
        assert not is_reversible(build_homogeneous(g, ChainParams(0.2, 0.1, r=0.1, d=d)))


def test_two_state_doubly_stochastic_are_symmetric():
    # a 2x2 doubly stochastic matrix is [[1-a, a], [a, 1-a]]; enumerate a grid
    for a, b in itertools.product(np.linspace(0, 1, 21), repeat=2):
        P = TransitionMatrix.from_dense([[1 - a, a], [b, 1 - b]])
        if is_doubly_stochastic(P):
            assert is_reversible(P)
    for q_c, r in [(0.25, 0.0), (0.25, 0.2), (0.5, 0.5)]:
        assert is_reversible(build_homogeneous(LongRangeGraph(2, ()), ChainParams(q_c, 0.0, r=r)))


def test_reversible_needs_doubly_stochastic():
    with pytest.raises(PreconditionError):
        is_reversible(TransitionMatrix.from_dense([[0.5, 0.5], [0.0, 1.0]]))
    with pytest.raises(PreconditionError):
        reversibilize(TransitionMatrix.from_dense([[0.5, 0.5], [0.0, 1.0]]))


def test_reversibilize_examples():
    P = cycle_matrix(9, 0.2)
    assert reversibilize(P) == P
    drift = TransitionMatrix.from_dense([[0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.6, 0.2, 0.2]])
    R = reversibilize(drift).dense()
    assert np.allclose(R, [[0.2, 0.4, 0.4], [0.4, 0.2, 0.4], [0.4, 0.4, 0.2]], atol=1e-15)


def test_reversibilize_preserves_every_cut(rng):
    for _ in range(20):
        _, _, P = random_chain(rng, n_range=(8, 8), models=("M2", "M3"), reversible=False)
        D, R = P.dense(), reversibilize(P).dense()
        for k in range(1, 8):
            for S in itertools.combinations(range(8), k):
                assert brute_phi(D, S) == pytest.approx(brute_phi(R, S), abs=1e-12)


def test_reversibilize_idempotent_and_sums(rng):
    for _ in range(20):
        _, _, P = random_chain(rng, n_range=(5, 30), reversible=False)
        R = reversibilize(P)
        assert is_reversible(R) and is_doubly_stochastic(R)
        assert reversibilize(R) == R
        assert (R.csr != 0).nnz == ((P.csr + P.csr.T) != 0).nnz


def test_matrix_round_trip(tmp_path, rng):
    _, _, P = random_chain(rng, n_range=(10, 14))
    text = format_matrix(P)
    assert text.splitlines()[0] == str(P.n)
    Q = parse_matrix(text)
    assert Q == P
    assert np.array_equal(Q.dense(), P.dense())
    write_matrix(P, tmp_path / "p.txt")
    assert read_matrix(tmp_path / "p.txt") == P


def test_matrix_dump_is_row_major_with_diagonal():
    lines = format_matrix(cycle_matrix(3, 0.25)).splitlines()[1:]
    keys = [tuple(map(int, ln.split()[:2])) for ln in lines]
    assert keys == sorted(keys)
    assert (0, 0) in keys and len(keys) == 9


@settings(max_examples=60, deadline=None)
@given(n=st.integers(4, 60), alpha=st.floats(1.1, 1.9), seed=st.integers(0, 2**32),
       q_c=st.floats(0, 0.3), frac=st.floats(0, 1), q_l=st.floats(0, 0.4))
def test_built_chains_are_doubly_stochastic(n, alpha, seed, q_c, frac, q_l):
    g = generate_m2(n, alpha, seed)
    p = ChainParams(q_c, q_l, r=frac * q_c, d=max(1, max_long_range_degree(g)))
    P = build_homogeneous(g, p)
    D = P.dense()
    assert (D >= 0).all() and (D <= 1).all()
    assert is_doubly_stochastic(P)
    assert is_reversible(build_homogeneous(g, p.with_r(0.0)))
