"""Network portraits and Portrait Divergence for digraphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .digraph import DirectedGraph
from .exceptions import DomainMismatchError, EmptyGraphError


def distance_matrix(g: DirectedGraph) -> np.ndarray:
    """All-pairs directed hop distances, ``inf`` where unreachable."""
    if g.n == 0:
        return np.zeros((0, 0))
    ptr, idx = g.csr()
    A = csr_matrix((np.ones(len(idx)), idx, ptr), shape=(g.n, g.n))
    return shortest_path(A, method="D", directed=True, unweighted=True)


@dataclass(frozen=True)
class Portrait:
    """``B[l, k]`` = number of vertices with exactly ``k`` vertices at distance ``l``.

    Rows run over ``l = 0..diameter`` and columns over ``k = 0..n-1`` (at
    least two columns so that ``B[0, 1]`` exists); every row sums to ``n``.
    """

    B: np.ndarray
    n: int

    @property
    def diameter(self) -> int:
        return self.B.shape[0] - 1

    def to_sparse_rows(self) -> list[dict]:
        return [{"l": l, "counts": {str(k): int(c) for k, c in enumerate(row) if c}}
                for l, row in enumerate(self.B)]


def portrait(g: DirectedGraph) -> Portrait:
    n = g.n
    D = distance_matrix(g)
    finite = np.isfinite(D)
    diam = int(D[finite].max()) if n else 0
    width = max(n, 2)
    B = np.zeros((diam + 1, width), dtype=np.int64)
    Di = np.where(finite, D, -1).astype(np.int64)
    for l in range(diam + 1):
        shell = (Di == l).sum(axis=1)
        B[l] = np.bincount(shell, minlength=width)
    return Portrait(B, n)


def portrait_distribution(P: Portrait) -> np.ndarray:
    """Joint distribution ``[l, k]`` proportional to ``k * B[l, k]``.

    The normaliser is the number of ordered pairs ``(u, v)`` with ``v``
    reachable from ``u`` (``u = v`` included), which equals ``n**2`` for
    strongly connected graphs.
    """
    if P.n == 0:
        raise EmptyGraphError("portrait distribution of the empty graph")
    k = np.arange(P.B.shape[1])
    W = P.B * k[None, :]
    return W / W.sum()


def _pad(P, shape):
    out = np.zeros(shape)
    out[tuple(slice(0, m) for m in P.shape)] = P
    return out


def _common(P, Q):
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    if P.ndim != Q.ndim:
        raise DomainMismatchError(f"distributions of rank {P.ndim} and {Q.ndim}")
    shape = tuple(max(a, b) for a, b in zip(P.shape, Q.shape))
    return _pad(P, shape), _pad(Q, shape)


def kl_divergence(P, Q, base: float = 2.0) -> float:
    """``sum P log(P/Q)`` with ``0 log 0 = 0``; raises if ``Q`` misses mass of ``P``."""
    P, Q = _common(P, Q)
    support = P > 0
    if (Q[support] <= 0).any():
        raise DomainMismatchError("Q assigns zero mass where P is positive")
    return float(np.sum(P[support] * np.log(P[support] / Q[support])) / np.log(base))


def js_divergence(P, Q) -> float:
    P, Q = _common(P, Q)
    M = 0.5 * (P + Q)
    js = 0.5 * kl_divergence(P, M) + 0.5 * kl_divergence(Q, M)
    return float(min(1.0, max(0.0, js)))


def portrait_divergence_from_portraits(p1: Portrait, p2: Portrait) -> float:
    return js_divergence(portrait_distribution(p1), portrait_distribution(p2))


def portrait_divergence(g1: DirectedGraph, g2: DirectedGraph) -> float:
    """Jensen-Shannon divergence (base 2) between portrait distributions; in ``[0, 1]``."""
    return portrait_divergence_from_portraits(portrait(g1), portrait(g2))
