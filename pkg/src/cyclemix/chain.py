"""Homogeneous transition matrices on cycle-plus-chord graphs.

Every node moves clockwise with probability ``q_c + r``, counterclockwise
with ``q_c - r``, along each incident long-range edge with ``q_l / d``, and
holds with whatever probability is left. The result is doubly stochastic,
so the uniform distribution is stationary.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InfeasibleParamsError, InvalidParameterError, PreconditionError
from .topology import LongRangeGraph, degree_cap, max_long_range_degree

__all__ = [
    "ChainParams",
    "TransitionMatrix",
    "build_homogeneous",
    "is_feasible",
    "is_lazy",
    "is_doubly_stochastic",
    "is_reversible",
    "reversibilize",
    "format_matrix",
    "parse_matrix",
    "write_matrix",
    "read_matrix",
]

STOCH_TOL = 1e-12


@dataclass(frozen=True)
class ChainParams:
    """Parameters ``(q_c, q_l, r, d)`` of a homogeneous chain.

    With ``lazy=True`` the builder refuses chains whose hold probability
    drops below 1/2 somewhere.
    """

    q_c: float
    q_l: float
    r: float = 0.0
    d: float = 1.0
    lazy: bool = False

    def __post_init__(self):
        if self.q_c < 0:
            raise InvalidParameterError(f"q_c must be >= 0, got {self.q_c}")
        if not (0 <= self.r <= self.q_c):
            raise InvalidParameterError(f"need 0 <= r <= q_c, got r={self.r}, q_c={self.q_c}")
        if self.q_l < 0:
            raise InvalidParameterError(f"q_l must be >= 0, got {self.q_l}")
        if self.d < 1:
            raise InvalidParameterError(f"d must be >= 1, got {self.d}")

    @classmethod
    def for_alpha(cls, alpha: float, q_c: float = 0.2, q_l: float = 0.1, r: float = 0.0,
                  lazy: bool = False) -> "ChainParams":
        """Parameters with ``d`` set to the degree cap of ``alpha``."""
        return cls(q_c, q_l, r, float(degree_cap(alpha)), lazy)

    def with_r(self, r: float) -> "ChainParams":
        return ChainParams(self.q_c, self.q_l, r, self.d, self.lazy)

    @property
    def edge_prob(self) -> float:
        return self.q_l / self.d


class TransitionMatrix:
    """Row-stochastic sparse matrix (CSR, diagonal stored explicitly).

    Instances are treated as immutable; the wrapped array must not be
    modified after construction.
    """

    __slots__ = ("csr",)

    def __init__(self, csr):
        csr = sp.csr_array(csr, dtype=np.float64)
        if csr.shape[0] != csr.shape[1]:
            raise InvalidParameterError(f"transition matrix must be square, got {csr.shape}")
        csr.sum_duplicates()
        csr.sort_indices()
        self.csr = csr

    @classmethod
    def from_dense(cls, a) -> "TransitionMatrix":
        return cls(sp.csr_array(np.asarray(a, dtype=np.float64)))

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    def dense(self) -> np.ndarray:
        return self.csr.toarray()

    def row(self, i: int) -> list[tuple[int, float]]:
        """Off-diagonal ``(target, probability)`` pairs of row ``i``."""
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        return [(int(j), float(p)) for j, p in zip(self.csr.indices[lo:hi], self.csr.data[lo:hi])
                if j != i and p != 0.0]

    def hold(self) -> np.ndarray:
        return self.csr.diagonal()

    def transpose(self) -> "TransitionMatrix":
        return TransitionMatrix(self.csr.T.tocsr())

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.csr.sum(axis=1)).ravel()

    def col_sums(self) -> np.ndarray:
        return np.asarray(self.csr.sum(axis=0)).ravel()

    def edge_list(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Off-diagonal nonzeros as ``(src, dst, prob)`` arrays in row-major order."""
        coo = self.csr.tocoo()
        keep = (coo.row != coo.col) & (coo.data != 0.0)
        return coo.row[keep].astype(np.int64), coo.col[keep].astype(np.int64), coo.data[keep]

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix) or other.n != self.n:
            return NotImplemented
        return (self.csr != other.csr).nnz == 0

    def __repr__(self):
        return f"TransitionMatrix(n={self.n}, nnz={self.csr.nnz})"


def _offdiag_mass(g: LongRangeGraph, params: ChainParams) -> float:
    return 2.0 * params.q_c + max_long_range_degree(g) * params.edge_prob


def is_feasible(g: LongRangeGraph, params: ChainParams) -> bool:
    """True iff no row would need a negative hold probability."""
    return _offdiag_mass(g, params) <= 1.0 + STOCH_TOL


def build_homogeneous(g: LongRangeGraph, params: ChainParams) -> TransitionMatrix:
    """Homogeneous chain of ``params`` on graph ``g``.

    Chords that duplicate a cycle edge add their ``q_l / d`` to the cycle
    probability; on 2- and 3-cycles coinciding neighbours add likewise.
    """
    if not is_feasible(g, params):
        raise InfeasibleParamsError(
            f"row mass {_offdiag_mass(g, params):.6g} > 1 for max degree "
            f"{max_long_range_degree(g)} with {params}"
        )
    n = g.n
    idx = np.arange(n, dtype=np.int64)
    rows = [idx, idx]
    cols = [(idx + 1) % n, (idx - 1) % n]
    vals = [np.full(n, params.q_c + params.r), np.full(n, params.q_c - params.r)]
    if g.edges:
        e = np.asarray(g.edges, dtype=np.int64)
        w = np.full(len(e), params.edge_prob)
        rows += [e[:, 0], e[:, 1]]
        cols += [e[:, 1], e[:, 0]]
        vals += [w, w]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    off = sp.coo_array((vals, (rows, cols)), shape=(n, n)).tocsr()
    off.sum_duplicates()
    off.eliminate_zeros()
    hold = 1.0 - np.asarray(off.sum(axis=1)).ravel()
    hold = np.where(np.abs(hold) < STOCH_TOL, 0.0, hold)
    P = TransitionMatrix(off + sp.diags_array(hold, format="csr"))
    if params.lazy and not is_lazy(P):
        raise InfeasibleParamsError(f"chain is not lazy: min hold {hold.min():.6g} < 1/2")
    return P


def is_lazy(P: TransitionMatrix) -> bool:
    return bool(P.hold().min() >= 0.5 - STOCH_TOL)


def is_doubly_stochastic(P: TransitionMatrix, tol: float = STOCH_TOL) -> bool:
    if P.csr.nnz and (P.csr.data.min() < 0 or P.csr.data.max() > 1):
        return False
    return bool(np.all(np.abs(P.row_sums() - 1) <= tol) and np.all(np.abs(P.col_sums() - 1) <= tol))


def is_reversible(P: TransitionMatrix, tol: float = STOCH_TOL) -> bool:
    """Detailed balance under the uniform distribution, i.e. symmetry of P."""
    if not is_doubly_stochastic(P, max(tol, STOCH_TOL)):
        raise PreconditionError("reversibility test assumes a doubly stochastic matrix")
    diff = (P.csr - P.csr.T).tocsr()
    return bool(diff.nnz == 0 or np.abs(diff.data).max() <= tol)


def reversibilize(P: TransitionMatrix) -> TransitionMatrix:
    """Additive reversibilization (P + P^T) / 2."""
    if not is_doubly_stochastic(P):
        raise PreconditionError("reversibilize needs a doubly stochastic matrix")
    return TransitionMatrix((P.csr + P.csr.T.tocsr()) * 0.5)


# ---------------------------------------------------------------------------
# debug dump: one "i j p" triple per stored entry, row-major


def format_matrix(P: TransitionMatrix) -> str:
    coo = P.csr.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{int(coo.row[k])} {int(coo.col[k])} {coo.data[k]:.17g}" for k in order]
    return f"{P.n}\n" + "".join(ln + "\n" for ln in lines)


def parse_matrix(text: str) -> TransitionMatrix:
    lines = text.split("\n")
    n = int(lines[0])
    rows, cols, vals = [], [], []
    for ln in lines[1:]:
        if not ln.strip():
            continue
        i, j, p = ln.split()
        rows.append(int(i))
        cols.append(int(j))
        vals.append(float(p))
    return TransitionMatrix(sp.coo_array((vals, (rows, cols)), shape=(n, n)).tocsr())


def write_matrix(P: TransitionMatrix, path) -> None:
    Path(path).write_text(format_matrix(P))


def read_matrix(path) -> TransitionMatrix:
    return parse_matrix(Path(path).read_text())
