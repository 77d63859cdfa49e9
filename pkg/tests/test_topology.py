import math

import numpy as np
import pytest
from scipy import stats

from cyclemix.chain import ChainParams, build_homogeneous
from cyclemix.errors import (
    DegenerateModelError,
    EmptyEdgeSetError,
    InvalidParameterError,
    NoEndpointsError,
    NotDivisibleError,
    NotEquidistantError,
    WrongModelError,
)
from cyclemix.mixing import evolve
from cyclemix.topology import (
    Arc,
    LongRangeGraph,
    ReducedGraph,
    _sample_pairs,
    degree_cap,
    derive_seed,
    edge_probability,
    empty_arcs,
    format_graph,
    generate,
    generate_m1,
    generate_m2,
    generate_m3,
    long_range_count,
    m1_positions,
    make_rng,
    max_long_range_degree,
    parse_graph,
    read_graph,
    reduce_m1,
    reduce_with_splitting,
    wind_up,
    write_graph,
)

NEAR_TWO = 2 - 1e-12  # ceil(n^(2 - alpha)) == 1


# ---------------------------------------------------------------------------
# generators


def test_m1_positions_and_matching():
    g = generate_m1(100, 1.5, 7)
    assert g.model_tag == "M1" and g.seed == 7
    assert g.endpoints().tolist() == [5 * i for i in range(20)]
    assert g.num_edges == 10
    assert max_long_range_degree(g) == 1


def test_m1_single_edge_near_two():
    g = generate_m1(16, NEAR_TWO, 3)
    assert g.edges == ((0, 8),)


def test_m1_positions_floor():
    # spacing 1000^0.4 / 2 = 7.92..., positions use the floor
    pos = m1_positions(1000, 1.4)
    spacing = 1000 ** 0.4 / 2
    assert pos[:5] == [math.floor(i * spacing) for i in range(5)]
    assert len(pos) == 2 * long_range_count(1000, 1.4)


@pytest.mark.parametrize("gen", [generate_m1, generate_m2, generate_m3])
def test_determinism(gen):
    assert gen(64, 1.5, 99) == gen(64, 1.5, 99)


def test_generator_objects_leave_seed_blank():
    g = generate_m2(50, 1.5, make_rng(1))
    assert g.seed is None


def test_m1_preconditions():
    with pytest.raises(InvalidParameterError):
        generate_m1(100, 2.0, 0)
    with pytest.raises(InvalidParameterError):
        generate_m1(100, 1.0, 0)
    with pytest.raises(InvalidParameterError):
        generate_m1(3, 1.5, 0)
    # 2 * ceil(10^0.9) = 16 > 10
    with pytest.raises(InvalidParameterError):
        generate_m1(10, 1.1, 0)


def test_m1_odd_after_dedup_small_n_is_an_error():
    # n=6, alpha=1.3: 2*ceil(6^0.7)=8 > 6 is rejected earlier; find a collision case
    for n in range(4, 40):
        for a in np.linspace(1.05, 1.95, 91):
            k = long_range_count(n, a)
            if 2 * k > n:
                continue
            if len(m1_positions(n, a)) % 2:
                if n >= 4 * n ** (2 - a):
                    with pytest.warns(RuntimeWarning):
                        g = generate_m1(n, a, 0)
                    assert max_long_range_degree(g) == 1
                else:
                    with pytest.raises(DegenerateModelError):
                        generate_m1(n, a, 0)
                return
    pytest.skip("no colliding configuration in range")


def test_m2_count():
    g = generate_m2(100, 1.5, 1)
    assert g.num_edges == 10 and g.model_tag == "M2"


def test_full_size_pair_subset():
    # no alpha in (1, 2) asks for all 6 pairs at n=4, so the sampler is driven directly
    assert _sample_pairs(4, 6, make_rng(0)) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_m2_single_edge_uniform():
    gen = make_rng(2024)
    counts = {}
    draws = 10000
    for _ in range(draws):
        (e,) = generate_m2(10, NEAR_TWO, gen).edges
        counts[e] = counts.get(e, 0) + 1
    assert len(counts) == 45
    p = 1 / 45
    sigma = math.sqrt(p * (1 - p) / draws)
    for c in counts.values():
        assert abs(c / draws - p) <= 3 * sigma
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


def test_m3_probability_and_mean():
    assert edge_probability(100, 1.5) == pytest.approx(0.002, rel=1e-12)
    gen = make_rng(5)
    sizes = [generate_m3(100, 1.5, gen).num_edges for _ in range(1000)]
    total, p = 4950, 0.002
    mean, var = total * p, total * p * (1 - p)
    assert abs(np.mean(sizes) - mean) <= 3 * math.sqrt(var / 1000)


def test_generate_dispatch():
    assert generate("m2", 100, 1.5, 4) == generate_m2(100, 1.5, 4)
    with pytest.raises(InvalidParameterError):
        generate("M4", 100, 1.5, 4)


def test_graph_validation():
    with pytest.raises(InvalidParameterError):
        LongRangeGraph(5, ((1, 1),))
    with pytest.raises(InvalidParameterError):
        LongRangeGraph(5, ((1, 2), (2, 1)))
    with pytest.raises(InvalidParameterError):
        LongRangeGraph(5, ((1, 5),))
    g = LongRangeGraph(10, ((7, 3), (0, 5)))
    assert g.edges == ((0, 5), (3, 7))


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert len({derive_seed(0, n, t) for n in range(10) for t in range(10)}) == 100


# ---------------------------------------------------------------------------
# degrees


def test_max_degree():
    assert max_long_range_degree(LongRangeGraph(10, ((0, 5), (0, 7), (3, 9)))) == 2
    assert max_long_range_degree(LongRangeGraph(10, ())) == 0


@pytest.mark.parametrize("alpha,cap", [(1.5, 4), (4 / 3, 6), (1.9, 3)])
def test_degree_cap(alpha, cap):
    assert degree_cap(alpha) == cap


def test_degree_cap_rejects_bad_alpha():
    with pytest.raises(InvalidParameterError):
        degree_cap(2.0)


# ---------------------------------------------------------------------------
# arcs


def test_empty_arcs_two_endpoints():
    g = LongRangeGraph(10, ((0, 5),))
    assert empty_arcs(g) == [Arc(1, 4), Arc(6, 4)]
    assert Arc(6, 4).nodes(10) == [6, 7, 8, 9]


def test_empty_arcs_all_endpoints():
    g = LongRangeGraph(8, ((0, 4), (1, 5), (2, 6), (3, 7)))
    assert empty_arcs(g) == []


def test_empty_arcs_no_edges_carries_whole_cycle():
    with pytest.raises(NoEndpointsError) as err:
        empty_arcs(LongRangeGraph(12, ()))
    assert err.value.arc == Arc(0, 12)


def test_empty_arcs_partition(rng):
    for _ in range(50):
        g = generate_m2(int(rng.integers(20, 300)), 1.5, rng)
        arcs = empty_arcs(g)
        assert sum(a.length for a in arcs) + g.endpoints().size == g.n
        ends = set(g.endpoints().tolist())
        for a in arcs:
            assert not ends & set(a.nodes(g.n))
        assert [a.length for a in arcs] == sorted((a.length for a in arcs), reverse=True)


def test_closed_arcs_allow_inner_chords():
    # chord (2, 4) lies inside 1..9; every longer arc would cut the chord (0, 10)
    g = LongRangeGraph(20, ((2, 4), (0, 10)))
    closed = empty_arcs(g, closed=True)
    assert closed[0] == Arc(1, 9)
    assert empty_arcs(g)[0] == Arc(11, 9)
    for a in closed:
        nodes = set(a.nodes(g.n))
        assert a.length <= g.n // 2
        for u, v in g.edges:
            assert (u in nodes) == (v in nodes)


def test_longest_arc_matches_spacing_order_statistics():
    # k uniform points on a circle: E[max gap] is about (n/k) * H_k
    ratios = {}
    for n in (256, 1024, 4096):
        gen = make_rng(n)
        longest, oracle = [], []
        for _ in range(20):
            g = generate_m2(n, 1.5, gen)
            k = g.endpoints().size
            longest.append(empty_arcs(g)[0].length)
            oracle.append(n / k * sum(1 / i for i in range(1, k + 1)))
        assert 0.7 <= np.median(longest) / np.median(oracle) <= 1.3
        ratios[n] = np.median(longest) / (math.sqrt(n) * math.log(n))
    assert max(ratios.values()) / min(ratios.values()) <= 1.5


# ---------------------------------------------------------------------------
# reductions


def test_reduce_m1_sizes_and_origin():
    g = generate_m1(100, 1.5, 3)
    red = reduce_m1(g)
    assert red.m == 20
    assert list(red.origin) == g.endpoints().tolist()
    back = sorted(tuple(sorted((red.origin[a], red.origin[b]))) for a, b in red.matching)
    assert back == list(g.edges)


def test_reduce_m1_single_edge():
    red = reduce_m1(generate_m1(16, NEAR_TWO, 0))
    assert red.m == 2 and red.matching == ((0, 1),) and red.origin == (0, 8)


def test_reduce_m1_wrong_model():
    with pytest.raises(WrongModelError):
        reduce_m1(generate_m2(100, 1.5, 0))


def test_splitting_makes_adjacent_copies():
    g = LongRangeGraph(12, ((0, 4), (0, 8), (3, 9)), 1.5, "M2")
    red = reduce_with_splitting(g, 0)
    assert red.m == 6
    assert red.origin == (0, 0, 3, 4, 8, 9)
    partners = {a: b for a, b in red.matching} | {b: a for a, b in red.matching}
    assert {red.origin[partners[0]], red.origin[partners[1]]} == {4, 8}


def test_splitting_without_high_degree_matches_reduce_m1():
    edges = ((0, 30), (10, 50), (20, 70), (40, 60))
    split = reduce_with_splitting(LongRangeGraph(80, edges, 1.5, "M2"), 1)
    plain = reduce_m1(LongRangeGraph(80, edges, 1.5, "M1"))
    assert split == plain


def test_splitting_counts(rng):
    for _ in range(100):
        g = generate_m2(int(rng.integers(50, 500)), float(rng.uniform(1.2, 1.8)), rng)
        red = reduce_with_splitting(g, rng)
        assert red.m == 2 * g.num_edges
        assert sorted(red.origin) == list(red.origin)


def test_splitting_errors():
    with pytest.raises(WrongModelError):
        reduce_with_splitting(generate_m1(100, 1.5, 0), 0)
    with pytest.raises(EmptyEdgeSetError):
        reduce_with_splitting(LongRangeGraph(10, (), 1.5, "M3"), 0)


def test_reduced_graph_validation():
    with pytest.raises(DegenerateModelError):
        ReducedGraph(4, ((0, 1), (1, 2)), (0, 1, 2, 3))


# ---------------------------------------------------------------------------
# winding


def _compatible_m1(seed):
    # endpoints 0, 5, ..., 95 are all congruent mod 5, so any matching is compatible
    return generate_m1(100, 1.5, seed)


def test_wind_up_collapses_to_loops():
    w = wind_up(_compatible_m1(4))
    assert w.m == 5
    assert w.loops == (10, 0, 0, 0, 0)
    assert all(len(pre) == 20 for pre in w.origin)


def test_wind_up_projection_uniform_and_chain_commutes(rng):
    g = _compatible_m1(5)
    w = wind_up(g)
    assert np.allclose(w.project(np.full(100, 0.01)), 0.2)
    params = ChainParams(0.2, 0.1, r=0.05, d=4)
    P = build_homogeneous(g, params)
    Q = build_homogeneous(w.to_graph(), params.with_r(0.05))
    sigma = rng.dirichlet(np.ones(100))
    for steps in (1, 7, 40):
        lhs = w.project(evolve(sigma, P, steps))
        rhs = evolve(w.project(sigma), Q, steps)
        assert np.allclose(lhs, rhs, atol=1e-13)


def test_wind_up_errors():
    with pytest.raises(NotEquidistantError):
        wind_up(LongRangeGraph(100, (), 1.5, "M1"))
    # 4 endpoints cannot be equidistant on 10 nodes
    with pytest.raises(NotDivisibleError):
        wind_up(LongRangeGraph(10, ((0, 3), (6, 8)), None, "M1"))
    with pytest.raises(NotEquidistantError):
        wind_up(LongRangeGraph(8, ((0, 1), (4, 5)), None, "M1"))
    # n^(alpha-1)/2 is not an integer
    with pytest.raises(NotDivisibleError):
        wind_up(generate_m1(64, 1.4, 0))


# ---------------------------------------------------------------------------
# serialization


def test_graph_round_trip(tmp_path):
    for g in (generate_m1(100, 1.5, 1), generate_m3(80, 1.3, 2),
              LongRangeGraph(9, ((0, 4),))):
        text = format_graph(g)
        assert parse_graph(text) == g
        assert format_graph(parse_graph(text)) == text
        write_graph(g, tmp_path / "g.txt")
        assert read_graph(tmp_path / "g.txt") == g


def test_graph_format_layout():
    text = format_graph(LongRangeGraph(10, ((3, 7), (0, 5)), 1.5, "M2", 11))
    assert text == "10 1.5 M2 11\n0 5\n3 7\n"
