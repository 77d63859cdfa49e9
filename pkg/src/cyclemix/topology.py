"""Cycle graphs with random long-range chords.

Nodes are the integers ``0..n-1`` arranged on a cycle. Three random models
add long-range edges with target density ``2 n^-alpha``:

* ``M1``: a uniformly random perfect matching on ``2*ceil(n^(2-alpha))``
  almost equidistant nodes ``floor(i * n^(alpha-1) / 2) mod n``.
* ``M2``: a uniform subset of exactly ``ceil(n^(2-alpha))`` unordered pairs.
* ``M3``: every unordered pair independently with probability ``2 n^-alpha``.

Pairs that coincide with cycle edges are allowed in M2/M3 and are kept as
long-range edges.

The module also carries the arc analysis used for conductance upper bounds
and the graph reductions (arc contraction, node splitting, wind-up) used as
proof devices.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateModelError,
    EmptyEdgeSetError,
    InvalidParameterError,
    NoEndpointsError,
    NotDivisibleError,
    NotEquidistantError,
    WrongModelError,
)

__all__ = [
    "MODELS",
    "LongRangeGraph",
    "Arc",
    "ReducedGraph",
    "WoundGraph",
    "make_rng",
    "derive_seed",
    "long_range_count",
    "edge_probability",
    "m1_positions",
    "generate",
    "generate_m1",
    "generate_m2",
    "generate_m3",
    "max_long_range_degree",
    "degree_cap",
    "empty_arcs",
    "reduce_m1",
    "reduce_with_splitting",
    "wind_up",
    "write_graph",
    "read_graph",
    "format_graph",
    "parse_graph",
]

MODELS = ("M1", "M2", "M3")
_TAGS = MODELS + ("custom",)

# Slack for float powers like 100**0.5 landing a hair above an integer.
_ROUND_EPS = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def derive_seed(base_seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed for the stream addressed by ``key``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)


def _check_alpha(alpha: float) -> None:
    if not (1.0 < alpha < 2.0):
        raise InvalidParameterError(f"alpha must lie in (1, 2), got {alpha!r}")


def _check_n(n: int) -> None:
    if int(n) != n or n < 4:
        raise InvalidParameterError(f"n must be an integer >= 4, got {n!r}")


def long_range_count(n: int, alpha: float) -> int:
    """ceil(n^(2-alpha)), the edge count of M2 and the matching size of M1."""
    x = float(n) ** (2.0 - alpha)
    return max(1, math.ceil(x - _ROUND_EPS * x))


# ---------------------------------------------------------------------------
# graph value types


@dataclass(frozen=True)
class LongRangeGraph:
    """Cycle on ``n`` nodes plus a set of long-range chords.

    ``edges`` holds sorted ``(u, v)`` pairs with ``u < v``, sorted
    lexicographically. ``alpha`` and ``seed`` are provenance and may be
    ``None`` for hand-built graphs.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    alpha: float | None = None
    model_tag: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameterError(f"need at least 2 nodes, got n={self.n}")
        if self.model_tag not in _TAGS:
            raise InvalidParameterError(f"unknown model tag {self.model_tag!r}")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidParameterError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidParameterError(f"edge ({u}, {v}) out of range for n={self.n}")
            e = (u, v) if u < v else (v, u)
            if e in canon:
                raise InvalidParameterError(f"duplicate edge {e}")
            canon.add(e)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """Long-range degree of every node."""
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges:
            arr = np.asarray(self.edges, dtype=np.int64)
            np.add.at(deg, arr[:, 0], 1)
            np.add.at(deg, arr[:, 1], 1)
        return deg

    def endpoints(self) -> np.ndarray:
        """Sorted nodes carrying at least one long-range edge."""
        return np.flatnonzero(self.degrees())

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists of the connectivity graph (cycle plus chords)."""
        n = self.n
        adj = [set() for _ in range(n)]
        for i in range(n):
            for j in ((i + 1) % n, (i - 1) % n):
                if j != i:
                    adj[i].add(j)
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return [sorted(a) for a in adj]

    def with_edges(self, edges) -> "LongRangeGraph":
        return LongRangeGraph(self.n, tuple(edges), self.alpha, self.model_tag, self.seed)


@dataclass(frozen=True)
class Arc:
    """Consecutive run of ``length`` cycle nodes beginning at ``start``."""

    start: int
    length: int

    def nodes(self, n: int) -> list[int]:
        if not (1 <= self.length <= n):
            raise InvalidParameterError(f"arc length {self.length} outside 1..{n}")
        return [(self.start + k) % n for k in range(self.length)]


@dataclass(frozen=True)
class ReducedGraph:
    """Cycle on ``m`` reduced nodes whose long-range edges form a perfect matching.

    ``origin[k]`` is the original node that reduced node ``k`` stands for;
    split nodes appear several times in a row.
    """

    m: int
    matching: tuple[tuple[int, int], ...]
    origin: tuple[int, ...]

    def __post_init__(self):
        if self.m % 2:
            raise DegenerateModelError(f"reduced node count must be even, got {self.m}")
        covered = sorted(x for e in self.matching for x in e)
        if covered != list(range(self.m)):
            raise DegenerateModelError("matching does not cover every reduced node exactly once")

    def cycle_edges(self) -> list[tuple[int, int]]:
        return [(k, (k + 1) % self.m) for k in range(self.m)]

    def to_graph(self) -> LongRangeGraph:
        """The reduced cycle as a graph (matching chords as long-range edges)."""
        return LongRangeGraph(self.m, self.matching, None, "custom", None)


@dataclass(frozen=True)
class WoundGraph:
    """Quotient of an equidistant M1 graph wound onto a short cycle.

    Node ``k`` of the quotient collects every original node congruent to
    ``k`` modulo ``m``. Long-range edges become ``loops[k]`` self-loops,
    which the homogeneous chain treats as staying put.
    """

    m: int
    loops: tuple[int, ...]
    origin: tuple[tuple[int, ...], ...]
    n: int

    def project(self, weights) -> np.ndarray:
        """Push a distribution on the original cycle down to the quotient."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.n,):
            raise InvalidParameterError(f"expected length {self.n}, got {w.shape}")
        return w.reshape(-1, self.m).sum(axis=0)

    def to_graph(self) -> LongRangeGraph:
        """Bare quotient cycle; loop edges carry no transition mass off the node."""
        return LongRangeGraph(self.m, (), None, "custom", None)


# ---------------------------------------------------------------------------
# generators


def m1_positions(n: int, alpha: float) -> list[int]:
    """Almost equidistant endpoint positions, in generation order, deduplicated."""
    count = 2 * long_range_count(n, alpha)
    spacing = float(n) ** (alpha - 1.0) / 2.0
    seen = set()
    out = []
    for i in range(count):
        x = i * spacing
        p = math.floor(x + _ROUND_EPS * max(1.0, x)) % n
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def generate_m1(n: int, alpha: float, rng) -> LongRangeGraph:
    """Random perfect matching on the almost equidistant nodes.

    ``rng`` is a seed (int) or a ``numpy.random.Generator``; the stored seed
    is ``None`` in the latter case.
    """
    _check_n(n)
    _check_alpha(alpha)
    k = long_range_count(n, alpha)
    if 2 * k > n:
        raise InvalidParameterError(f"2*ceil(n^(2-alpha)) = {2 * k} exceeds n = {n}")
    pos = m1_positions(n, alpha)
    if len(pos) % 2:
        # only reachable when wrap-around collisions occur
        if n >= 4 * float(n) ** (2.0 - alpha):
            warnings.warn(
                f"M1 endpoints collided at n={n}, alpha={alpha}; dropping node {pos[-1]}",
                RuntimeWarning,
                stacklevel=2,
            )
            pos = pos[:-1]
        else:
            raise DegenerateModelError(f"odd endpoint count {len(pos)} after deduplication")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    gen = _as_rng(rng)
    perm = gen.permutation(len(pos))
    edges = [(pos[perm[2 * i]], pos[perm[2 * i + 1]]) for i in range(len(pos) // 2)]
    return LongRangeGraph(n, tuple(edges), float(alpha), "M1", seed)


def _pair_offsets(n: int) -> np.ndarray:
    u = np.arange(n, dtype=np.int64)
    return u * (2 * n - u - 1) // 2


def _decode_pairs(n: int, idx: np.ndarray) -> list[tuple[int, int]]:
    """Map lexicographic pair indices in ``[0, n(n-1)/2)`` to ``(u, v)``, u < v."""
    idx = np.sort(np.asarray(idx, dtype=np.int64))
    offsets = _pair_offsets(n)
    u = np.searchsorted(offsets, idx, side="right") - 1
    v = idx - offsets[u] + u + 1
    return list(zip(u.tolist(), v.tolist()))


def _sample_pairs(n: int, k: int, gen: np.random.Generator) -> list[tuple[int, int]]:
    total = n * (n - 1) // 2
    if not (0 <= k <= total):
        raise InvalidParameterError(f"cannot draw {k} of {total} pairs")
    return _decode_pairs(n, gen.choice(total, size=k, replace=False))


def generate_m2(n: int, alpha: float, rng) -> LongRangeGraph:
    """Uniform subset of exactly ceil(n^(2-alpha)) unordered pairs."""
    _check_n(n)
    _check_alpha(alpha)
    k = long_range_count(n, alpha)
    if k > n * (n - 1) // 2:
        raise InvalidParameterError(f"{k} edges requested but only {n * (n - 1) // 2} pairs exist")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    edges = _sample_pairs(n, k, _as_rng(rng))
    return LongRangeGraph(n, tuple(edges), float(alpha), "M2", seed)


def edge_probability(n: int, alpha: float) -> float:
    """Per-pair inclusion probability 2 n^-alpha of M3."""
    return 2.0 * float(n) ** (-alpha)


def generate_m3(n: int, alpha: float, rng) -> LongRangeGraph:
    """Each pair independently with probability 2 n^-alpha.

    Sampled as a Binomial edge count followed by a uniform subset of that
    size, which has the same law as independent coin flips per pair.
    """
    _check_n(n)
    _check_alpha(alpha)
    p = edge_probability(n, alpha)
    total = n * (n - 1) // 2
    seed = rng if not isinstance(rng, np.random.Generator) else None
    gen = _as_rng(rng)
    k = int(gen.binomial(total, p))
    edges = _sample_pairs(n, k, gen)
    return LongRangeGraph(n, tuple(edges), float(alpha), "M3", seed)


_GENERATORS = {"M1": generate_m1, "M2": generate_m2, "M3": generate_m3}


def generate(model: str, n: int, alpha: float, rng) -> LongRangeGraph:
    """Dispatch on a model tag (case-insensitive)."""
    key = str(model).upper()
    if key not in _GENERATORS:
        raise InvalidParameterError(f"unknown model {model!r}; expected one of {MODELS}")
    return _GENERATORS[key](n, alpha, rng)


# ---------------------------------------------------------------------------
# degrees


def max_long_range_degree(g: LongRangeGraph) -> int:
    if not g.edges:
        return 0
    return int(g.degrees().max())


def degree_cap(alpha: float) -> int:
    """Integer long-range divisor ceil(2 / (alpha - 1))."""
    _check_alpha(alpha)
    x = 2.0 / (alpha - 1.0)
    return math.ceil(x - _ROUND_EPS * x)


# ---------------------------------------------------------------------------
# arcs


def _empty_runs(g: LongRangeGraph) -> list[Arc]:
    ends = g.endpoints()
    if ends.size == 0:
        raise NoEndpointsError("graph has no long-range edges", arc=Arc(0, g.n))
    n = g.n
    arcs = []
    nxt = np.roll(ends, -1)
    gaps = (nxt - ends - 1) % n
    for e, gap in zip(ends.tolist(), gaps.tolist()):
        if gap > 0:
            arcs.append(Arc((e + 1) % n, int(gap)))
    return arcs


def _closed_runs(g: LongRangeGraph) -> list[Arc]:
    """Longest arc of length <= n/2 from each start with no chord leaving it."""
    n = g.n
    if not g.edges:
        raise NoEndpointsError("graph has no long-range edges", arc=Arc(0, n))
    e = np.asarray(g.edges, dtype=np.int64)
    half = n // 2
    best = {}
    lengths = np.arange(1, half + 1)
    for a in range(n):
        ru = (e[:, 0] - a) % n
        rv = (e[:, 1] - a) % n
        lo = np.minimum(ru, rv)
        hi = np.maximum(ru, rv)
        # length L cuts the chord iff lo < L <= hi
        diff = np.zeros(half + 2, dtype=np.int64)
        s = np.clip(lo + 1, 0, half + 1)
        t = np.clip(hi + 1, 0, half + 1)
        np.add.at(diff, s, 1)
        np.add.at(diff, t, -1)
        cover = np.cumsum(diff)[1 : half + 1]
        ok = lengths[cover == 0]
        if ok.size:
            best[a] = int(ok.max())
    arcs = [Arc(a, L) for a, L in best.items()]
    # drop arcs strictly inside another candidate
    kept = []
    for arc in arcs:
        inside = False
        for other in arcs:
            if other is arc or other.length <= arc.length:
                continue
            off = (arc.start - other.start) % n
            if off + arc.length <= other.length:
                inside = True
                break
        if not inside:
            kept.append(arc)
    return kept


def empty_arcs(g: LongRangeGraph, closed: bool = False) -> list[Arc]:
    """Arcs free of long-range edges, longest first.

    By default these are the maximal runs of nodes without any incident
    long-range edge. With ``closed=True`` the weaker requirement is that no
    long-range edge leaves the arc (chords inside it are allowed); for each
    start the longest such arc of length at most ``n // 2`` is kept.
    """
    arcs = _closed_runs(g) if closed else _empty_runs(g)
    return sorted(arcs, key=lambda a: (-a.length, a.start))


# ---------------------------------------------------------------------------
# reductions


def reduce_m1(g: LongRangeGraph) -> ReducedGraph:
    """Contract every empty arc of an M1 graph into a single cycle edge."""
    if g.model_tag != "M1":
        raise WrongModelError(f"reduce_m1 needs an M1 graph, got {g.model_tag}")
    ends = g.endpoints().tolist()
    index = {v: k for k, v in enumerate(ends)}
    matching = tuple(sorted((index[u], index[v]) for u, v in g.edges))
    return ReducedGraph(len(ends), matching, tuple(ends))


def reduce_with_splitting(g: LongRangeGraph, rng) -> ReducedGraph:
    """Reduce an M2/M3 graph, splitting degree-k nodes into k consecutive copies.

    The copies of a node receive its long-range edges in uniformly random
    order, so the reduced long-range edges form a perfect matching.
    """
    if g.model_tag not in ("M2", "M3"):
        raise WrongModelError(f"reduce_with_splitting needs M2 or M3, got {g.model_tag}")
    if not g.edges:
        raise EmptyEdgeSetError("graph has no long-range edges to reduce")
    gen = _as_rng(rng)
    incident: dict[int, list[int]] = {}
    for k, (u, v) in enumerate(g.edges):
        incident.setdefault(u, []).append(k)
        incident.setdefault(v, []).append(k)
    origin = []
    slots: dict[int, list[int]] = {}
    for node in sorted(incident):
        edges_here = incident[node]
        order = gen.permutation(len(edges_here))
        for j in order.tolist():
            slots.setdefault(edges_here[j], []).append(len(origin))
            origin.append(node)
    matching = tuple(sorted((min(a), max(a)) for a in (slots[k] for k in range(len(g.edges)))))
    return ReducedGraph(len(origin), matching, tuple(origin))


def wind_up(g: LongRangeGraph) -> WoundGraph:
    """Wind an exactly equidistant M1 graph around a cycle of ``spacing`` nodes.

    Requires endpoints at every ``spacing``-th node, ``spacing`` an integer
    dividing ``n``, and every matching edge joining nodes of equal residue
    modulo ``spacing``. Incompatible instances are rejected.
    """
    n = g.n
    ends = g.endpoints()
    if ends.size < 2:
        raise NotEquidistantError("need at least two endpoints to define a spacing")
    if n % ends.size:
        raise NotDivisibleError(f"{ends.size} endpoints cannot be equidistant on {n} nodes")
    m = n // ends.size
    if g.alpha is not None:
        s = float(n) ** (g.alpha - 1.0) / 2.0
        if abs(s - round(s)) > 1e-9 or round(s) != m:
            raise NotDivisibleError(f"n^(alpha-1)/2 = {s:g} is not the integer spacing {m}")
    if not np.array_equal(np.diff(ends), np.full(ends.size - 1, m)):
        raise NotEquidistantError("endpoints are not evenly spaced")
    if g.degrees().max() > 1:
        raise NotEquidistantError("endpoints must carry exactly one long-range edge")
    loops = [0] * m
    for u, v in g.edges:
        if u % m != v % m:
            raise NotEquidistantError(f"edge ({u}, {v}) joins different residues mod {m}")
        loops[u % m] += 1
    origin = tuple(tuple(range(k, n, m)) for k in range(m))
    return WoundGraph(m, tuple(loops), origin, n)


# ---------------------------------------------------------------------------
# serialization


def _fmt_opt(x) -> str:
    return "-" if x is None else repr(x)


def format_graph(g: LongRangeGraph) -> str:
    """Header ``n alpha model seed`` then one sorted ``u v`` line per edge."""
    buf = io.StringIO()
    buf.write(f"{g.n} {_fmt_opt(g.alpha)} {g.model_tag} {_fmt_opt(g.seed)}\n")
    for u, v in g.edges:
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def parse_graph(text: str) -> LongRangeGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidParameterError("empty graph file")
    head = lines[0].split()
    if len(head) != 4:
        raise InvalidParameterError(f"bad header {lines[0]!r}; expected 'n alpha model seed'")
    n = int(head[0])
    alpha = None if head[1] == "-" else float(head[1])
    seed = None if head[3] == "-" else int(head[3])
    edges = []
    for ln in lines[1:]:
        u, v = ln.split()
        edges.append((int(u), int(v)))
    return LongRangeGraph(n, tuple(edges), alpha, head[2], seed)


def write_graph(g: LongRangeGraph, path) -> None:
    Path(path).write_text(format_graph(g))


def read_graph(path) -> LongRangeGraph:
    return parse_graph(Path(path).read_text())
