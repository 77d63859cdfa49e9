"""Stationary flows, cut conductance and global conductance.

All quantities use the uniform stationary distribution of a doubly
stochastic chain: ``Q(A, B) = sum_{i in A, j in B} p_ij / n`` and
``Phi(S) = Q(S, S^c) / (pi(S) pi(S^c))``.

Three routes to the global conductance are provided: exhaustive search
over all subsets, search over connected subsets only (a minimizing set is
always connected), and the cheap upper bound from arcs that no long-range
edge touches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import TransitionMatrix, is_doubly_stochastic
from .errors import (
    DisconnectedChainError,
    InvalidParameterError,
    NoEmptyArcError,
    NoEndpointsError,
    OverlappingSetsError,
    TooLargeError,
)
from .topology import Arc, LongRangeGraph, empty_arcs

__all__ = [
    "CutResult",
    "ConductanceEstimate",
    "EXHAUSTIVE_LIMIT",
    "CONNECTED_LIMIT",
    "flow",
    "phi_of_set",
    "conductance_exact",
    "conductance_connected",
    "conductance_arc_upper",
    "connected_subsets",
    "support_neighbors",
    "format_cut",
]

EXHAUSTIVE_LIMIT = 20
CONNECTED_LIMIT = 40

# candidates within this relative distance of the running minimum are
# re-evaluated exactly; ties are then decided at TIE_RTOL
_SCREEN_RTOL = 1e-9
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class CutResult:
    set: tuple[int, ...]
    flow: float
    denom: float
    phi: float

    def csv_row(self) -> str:
        return format_cut(self)


@dataclass(frozen=True)
class ConductanceEstimate:
    value: float
    kind: str  # "exact", "connected-exact" or "arc-upper-bound"
    witness: CutResult | None = None


def format_cut(c: CutResult) -> str:
    """CSV row ``phi,flow,denom,set`` with the set hyphen-joined."""
    return f"{c.phi!r},{c.flow!r},{c.denom!r},{'-'.join(map(str, c.set))}"


def _membership(n: int, nodes) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter((int(v) for v in nodes), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InvalidParameterError(f"node ids must lie in 0..{n - 1}")
    mask[idx] = True
    return mask


def _cross_sum(P: TransitionMatrix, src: np.ndarray, dst: np.ndarray) -> float:
    """Correctly rounded sum of p_ij over i in src, j in dst."""
    csr = P.csr
    terms = []
    for i in np.flatnonzero(src):
        lo, hi = csr.indptr[i], csr.indptr[i + 1]
        cols = csr.indices[lo:hi]
        sel = dst[cols]
        if sel.any():
            terms.extend(csr.data[lo:hi][sel].tolist())
    return math.fsum(terms)


def flow(P: TransitionMatrix, A, B) -> float:
    """Stationary flow Q(A, B) from A into B."""
    n = P.n
    a = _membership(n, A)
    b = _membership(n, B)
    if (a & b).any():
        raise OverlappingSetsError("flow is defined for disjoint sets only")
    return _cross_sum(P, a, b) / n


def _cut(P: TransitionMatrix, members: np.ndarray) -> CutResult:
    n = P.n
    k = int(members.sum())
    if k == 0 or k == n:
        raise InvalidParameterError("cut set must be nonempty and proper")
    total = _cross_sum(P, members, ~members)
    fl = total / n
    denom = (k / n) * ((n - k) / n)
    return CutResult(tuple(np.flatnonzero(members).tolist()), fl, denom, fl / denom)


def phi_of_set(P: TransitionMatrix, S) -> CutResult:
    """Conductance of a single cut S (nonempty, proper)."""
    return _cut(P, _membership(P.n, S))


def _pick(P: TransitionMatrix, candidates) -> CutResult:
    """Exact re-evaluation of near-minimal sets; lexicographic tie-break."""
    n = P.n
    seen = set()
    cuts = []
    for c in candidates:
        key = tuple(sorted(int(v) for v in c))
        if key in seen:
            continue
        seen.add(key)
        cuts.append(_cut(P, _membership(n, key)))
    best = min(c.phi for c in cuts)
    ties = [c for c in cuts if c.phi <= best + TIE_RTOL * abs(best)]
    return min(ties, key=lambda c: c.set)


def _mask_nodes(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def conductance_exact(P: TransitionMatrix, limit: int = EXHAUSTIVE_LIMIT) -> ConductanceEstimate:
    """Minimum of Phi(S) over every nonempty proper subset."""
    n = P.n
    if n > limit:
        raise TooLargeError(
            f"n={n} exceeds the exhaustive limit {limit}; use conductance_connected or arc bounds"
        )
    if n < 2:
        raise InvalidParameterError("conductance needs at least two states")
    src, dst, prob = P.edge_list()
    full = (1 << n) - 1
    best = math.inf
    cands: list[tuple[int, float]] = []
    chunk = 1 << 16
    for lo in range(1, full, chunk):
        masks = np.arange(lo, min(lo + chunk, full), dtype=np.int64)
        cut = np.zeros(masks.size)
        for i, j, p in zip(src.tolist(), dst.tolist(), prob.tolist()):
            cut += p * (((masks >> i) & 1) & (1 - ((masks >> j) & 1)))
        k = np.zeros(masks.size, dtype=np.int64)
        for b in range(n):
            k += (masks >> b) & 1
        phi = cut * n / (k * (n - k))
        m = float(phi.min())
        if m < best:
            best = m
            cands = [(c, p) for c, p in cands if p <= best * (1 + _SCREEN_RTOL)]
        sel = phi <= best * (1 + _SCREEN_RTOL)
        cands.extend(zip(masks[sel].tolist(), phi[sel].tolist()))
    w = _pick(P, [_mask_nodes(c, n) for c, _ in cands])
    return ConductanceEstimate(w.phi, "exact", w)


def support_neighbors(P: TransitionMatrix) -> list[list[int]]:
    """Undirected connectivity graph: i ~ j iff p_ij > 0 or p_ji > 0."""
    src, dst, _ = P.edge_list()
    adj = [set() for _ in range(P.n)]
    for i, j in zip(src.tolist(), dst.tolist()):
        adj[i].add(j)
        adj[j].add(i)
    return [sorted(a) for a in adj]


def _is_connected(adj: list[list[int]]) -> bool:
    n = len(adj)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def connected_subsets(adj: list[list[int]], max_size: int):
    """Yield every connected vertex set of size <= max_size exactly once, as a bitmask.

    ESU-style enumeration: each set is grown from its smallest vertex, and
    only vertices adjacent to the newest addition but not to the earlier
    ones enter the extension set.
    """
    n = len(adj)
    nb = [0] * n
    for u in range(n):
        for v in adj[u]:
            nb[u] |= 1 << v
    for v in range(n):
        above = ~((1 << (v + 1)) - 1)
        start = 1 << v
        # (subset, extension, closed neighbourhood of subset)
        stack = [(start, nb[v] & above, start | nb[v])]
        while stack:
            sub, ext, hood = stack.pop()
            yield sub
            if sub.bit_count() >= max_size:
                continue
            while ext:
                w_bit = ext & -ext
                ext ^= w_bit
                w = w_bit.bit_length() - 1
                new_ext = ext | (nb[w] & ~hood & above)
                stack.append((sub | w_bit, new_ext, hood | nb[w]))


def conductance_connected(P: TransitionMatrix, limit: int = CONNECTED_LIMIT) -> ConductanceEstimate:
    """Minimum of Phi(S) over connected S, which equals the global conductance."""
    n = P.n
    if n > limit:
        raise TooLargeError(f"n={n} exceeds the connected-enumeration limit {limit}")
    if n < 2:
        raise InvalidParameterError("conductance needs at least two states")
    adj = support_neighbors(P)
    if not _is_connected(adj):
        raise DisconnectedChainError("connectivity graph of the chain is not connected")
    dense = P.dense()
    np.fill_diagonal(dense, 0.0)
    off = dense.sum(axis=1)
    sym = ((dense + dense.T) > 0)
    inward = [np.flatnonzero(sym[w]).tolist() for w in range(n)]
    balanced = is_doubly_stochastic(P)
    max_size = n // 2 if balanced else n - 1
    full = (1 << n) - 1

    nb = [0] * n
    for u in range(n):
        for v in adj[u]:
            nb[u] |= 1 << v

    def grow(parent: int, c: float, w: int) -> float:
        # cut(S + w) = cut(S) + out(w) - flow between w and S in both directions
        for u in inward[w]:
            if (parent >> u) & 1:
                c -= dense[w, u] + dense[u, w]
        return c + off[w]

    best = math.inf
    cands: list[tuple[int, float]] = []
    for v in range(n):
        above = ~((1 << (v + 1)) - 1)
        start = 1 << v
        stack = [(start, nb[v] & above, start | nb[v], off[v])]
        while stack:
            sub, ext, hood, c = stack.pop()
            k = sub.bit_count()
            if sub != full:
                phi = c * n / (k * (n - k))
                if phi <= best * (1 + _SCREEN_RTOL):
                    if phi < best:
                        best = phi
                        cands = [x for x in cands if x[1] <= best * (1 + _SCREEN_RTOL)]
                    cands.append((sub, phi))
            if k >= max_size:
                continue
            while ext:
                w_bit = ext & -ext
                ext ^= w_bit
                w = w_bit.bit_length() - 1
                new_ext = ext | (nb[w] & ~hood & above)
                stack.append((sub | w_bit, new_ext, hood | nb[w], grow(sub, c, w)))
    sets = []
    for sub, _ in cands:
        nodes = _mask_nodes(sub, n)
        sets.append(nodes)
        if balanced:
            sets.append(_mask_nodes(full ^ sub, n))
    w = _pick(P, sets)
    return ConductanceEstimate(w.phi, "connected-exact", w)


def conductance_arc_upper(P: TransitionMatrix, g: LongRangeGraph, closed: bool = False) -> ConductanceEstimate:
    """Upper bound min Phi(A) over arcs free of long-range edges."""
    if g.n != P.n:
        raise InvalidParameterError(f"graph has {g.n} nodes but chain has {P.n}")
    try:
        arcs = [a for a in empty_arcs(g, closed=closed) if a.length < g.n]
    except NoEndpointsError:
        # bare cycle: every proper arc is empty, and all starts are equivalent
        arcs = [Arc(0, length) for length in range(1, g.n)]
    if not arcs:
        raise NoEmptyArcError("graph has no arc free of long-range edges")
    cuts = [phi_of_set(P, a.nodes(g.n)) for a in arcs]
    w = min(cuts, key=lambda c: (c.phi, c.set))
    return ConductanceEstimate(w.phi, "arc-upper-bound", w)
