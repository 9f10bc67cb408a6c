"""Directed flag complexes, F2 Betti numbers and log-clamped feature vectors.

A ``d``-simplex of the directed flag complex of ``G`` is an ordered tuple
``(v_0, ..., v_d)`` with an edge ``v_i -> v_j`` for every ``i < j``.  Simplices
are enumerated by sink extension: a tuple is extended by every common
out-neighbour of its vertices, appended as the new sink.  A depth-first
traversal over roots ``0..n-1`` with neighbours visited in increasing order
emits every dimension in lexicographic order, so each dimension is stored as
a trie level: the last vertex of each simplex plus the index of its parent
(the face obtained by dropping the sink).

Ranks of the boundary maps are obtained by F2 column reduction of the
coboundary matrices with the clearing optimisation: dimensions are processed
from the bottom up, and the pivot rows of one coboundary mark columns of the
next that are known to reduce to zero.  This is far cheaper on dense flag
complexes than reducing the boundary matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .digraph import DirectedGraph

KIND_BETTI = "betti"
KIND_SIMPLEX = "simplex"

# de Bruijn sequence for trailing-zero counts on 64-bit words
_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_DEBRUIJN_TABLE = np.array([
    0, 1, 48, 2, 57, 49, 28, 3, 61, 58, 50, 42, 38, 29, 17, 4,
    62, 55, 59, 36, 53, 51, 43, 22, 45, 39, 33, 30, 24, 18, 12, 5,
    63, 47, 56, 27, 60, 41, 37, 16, 54, 35, 52, 21, 44, 32, 23, 11,
    46, 26, 40, 15, 34, 20, 31, 10, 25, 14, 19, 9, 13, 8, 7, 6,
], dtype=np.int64)


def adjacency_bits(g: DirectedGraph) -> np.ndarray:
    """Out-neighbourhoods packed into ``(n, ceil(n/64))`` uint64 words."""
    words = max(1, (g.n + 63) // 64)
    bits = np.zeros((g.n, words), dtype=np.uint64)
    if g.num_edges:
        u, v = g.edges[:, 0], g.edges[:, 1]
        np.bitwise_or.at(bits, (u, v >> 6), np.left_shift(np.uint64(1), (v & 63).astype(np.uint64)))
    return bits


@numba.njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@numba.njit(cache=True)
def _next_bit(mask, start, table, debruijn):
    """Index of the lowest set bit of ``mask`` at position >= ``start``, or -1."""
    nwords = mask.shape[0]
    w = start >> 6
    if w >= nwords:
        return -1
    x = mask[w] & ~((np.uint64(1) << np.uint64(start & 63)) - np.uint64(1))
    while True:
        if x != np.uint64(0):
            low = x & (~x + np.uint64(1))
            return (w << 6) + table[np.int64((low * debruijn) >> np.uint64(58))]
        w += 1
        if w >= nwords:
            return -1
        x = mask[w]


@numba.njit(cache=True)
def _enumerate(bits, maxdim, store_dim, fill, offsets, last, parent, table, debruijn):
    """Depth-first sink extension.

    Counts simplices of every dimension ``<= maxdim``; when ``fill`` is set,
    also writes ``last``/``parent`` for dimensions ``<= store_dim`` at the
    flat positions given by ``offsets``.
    """
    n, nwords = bits.shape
    counts = np.zeros(maxdim + 1, dtype=np.int64)
    masks = np.empty((maxdim + 1, nwords), dtype=np.uint64)
    pos = np.zeros(maxdim + 1, dtype=np.int64)
    cur = np.zeros(maxdim + 1, dtype=np.int64)
    for v in range(n):
        i0 = counts[0]
        counts[0] += 1
        if fill:
            last[offsets[0] + i0] = v
            parent[offsets[0] + i0] = -1
        if maxdim == 0:
            continue
        masks[0, :] = bits[v, :]
        pos[0] = 0
        cur[0] = i0
        d = 0
        while d >= 0:
            if d + 1 == maxdim and d + 1 > store_dim:
                # top dimension is only counted
                c = 0
                for k in range(nwords):
                    c += _popcount(masks[d, k])
                counts[d + 1] += c
                d -= 1
                continue
            w = _next_bit(masks[d], pos[d], table, debruijn)
            if w < 0:
                d -= 1
                continue
            pos[d] = w + 1
            i = counts[d + 1]
            counts[d + 1] += 1
            if fill and d + 1 <= store_dim:
                last[offsets[d + 1] + i] = w
                parent[offsets[d + 1] + i] = cur[d]
            if d + 1 < maxdim:
                for k in range(nwords):
                    masks[d + 1, k] = masks[d, k] & bits[w, k]
                pos[d + 1] = 0
                cur[d + 1] = i
                d += 1
    return counts


@numba.njit(cache=True)
def _child_ptr(parent_slice, n_parents):
    ptr = np.zeros(n_parents + 1, dtype=np.int64)
    for p in parent_slice:
        ptr[p + 1] += 1
    for i in range(n_parents):
        ptr[i + 1] += ptr[i]
    return ptr


@numba.njit(cache=True)
def _lookup(key, length, last, offsets, cptr, cptr_off):
    """Index within its dimension of the simplex ``key[:length]``."""
    idx = key[0]
    for j in range(1, length):
        lo = cptr[cptr_off[j] + idx]
        hi = cptr[cptr_off[j] + idx + 1]
        target = key[j]
        base = offsets[j]
        while lo < hi:
            mid = (lo + hi) >> 1
            if last[base + mid] < target:
                lo = mid + 1
            else:
                hi = mid
        idx = lo
    return idx


@numba.njit(cache=True)
def _vertices(d, i, last, parent, offsets, out):
    for j in range(d, -1, -1):
        out[j] = last[offsets[j] + i]
        i = parent[offsets[j] + i]


@numba.njit(cache=True)
def _boundary_column(d, i, last, parent, offsets, cptr, cptr_off, verts, key, col):
    """Sorted row indices of the boundary of the ``i``-th ``d``-simplex."""
    _vertices(d, i, last, parent, offsets, verts)
    for f in range(d + 1):
        m = 0
        for j in range(d + 1):
            if j != f:
                key[m] = verts[j]
                m += 1
        col[f] = _lookup(key, d, last, offsets, cptr, cptr_off)
    # insertion sort; columns hold at most maxdim + 1 entries
    for a in range(1, d + 1):
        x = col[a]
        b = a - 1
        while b >= 0 and col[b] > x:
            col[b + 1] = col[b]
            b -= 1
        col[b + 1] = x


@numba.njit(cache=True)
def _all_faces(d, m, last, parent, offsets, cptr, cptr_off):
    """Sorted face indices of every ``d``-simplex, flattened row by row."""
    out = np.empty(m * (d + 1), dtype=np.int64)
    verts = np.empty(d + 1, dtype=np.int64)
    key = np.empty(d + 1, dtype=np.int64)
    col = np.empty(d + 1, dtype=np.int64)
    for i in range(m):
        _boundary_column(d, i, last, parent, offsets, cptr, cptr_off, verts, key, col)
        out[i * (d + 1):(i + 1) * (d + 1)] = col
    return out


@numba.njit(cache=True)
def _reduce(ptr, idx, n_cols, n_rows, cleared, budget):
    """Reduce a sparse F2 matrix given by sorted CSR columns.

    Columns are processed from last to first and the pivot of a column is
    its largest row.  Returns ``(rank_kept, skipped, pivot_rows)``, where
    ``pivot_rows`` lists the pivots of the kept nonzero columns.
    ``budget < 0`` means no limit; otherwise a column needing more than
    ``budget`` additions is abandoned.
    """
    owner_start = np.full(n_rows, -1, dtype=np.int64)
    owner_len = np.zeros(n_rows, dtype=np.int64)
    store = np.empty(1024, dtype=np.int64)
    store_len = 0
    work = np.empty(64, dtype=np.int64)
    tmp = np.empty_like(work)
    pivots = np.empty(min(n_cols, n_rows) + 1, dtype=np.int64)
    rank = 0
    skipped = 0
    for c in range(n_cols - 1, -1, -1):
        if cleared[c]:
            continue
        la = ptr[c + 1] - ptr[c]
        if work.shape[0] < la:
            work = np.empty(2 * la, dtype=np.int64)
        work[:la] = idx[ptr[c]:ptr[c + 1]]
        steps = 0
        abandoned = False
        while la > 0:
            piv = work[la - 1]
            s = owner_start[piv]
            if s < 0:
                break
            if budget >= 0 and steps >= budget:
                abandoned = True
                break
            steps += 1
            lb = owner_len[piv]
            need = la + lb
            if tmp.shape[0] < need:
                tmp = np.empty(2 * need, dtype=np.int64)
            # symmetric difference of two sorted lists
            a = 0
            b = 0
            k = 0
            while a < la and b < lb:
                x = work[a]
                y = store[s + b]
                if x < y:
                    tmp[k] = x
                    a += 1
                    k += 1
                elif y < x:
                    tmp[k] = y
                    b += 1
                    k += 1
                else:
                    a += 1
                    b += 1
            while a < la:
                tmp[k] = work[a]
                a += 1
                k += 1
            while b < lb:
                tmp[k] = store[s + b]
                b += 1
                k += 1
            swap = work
            work = tmp
            tmp = swap
            la = k
        if abandoned:
            skipped += 1
            continue
        if la == 0:
            continue
        piv = work[la - 1]
        if store_len + la > store.shape[0]:
            grown = np.empty(2 * (store_len + la), dtype=np.int64)
            grown[:store_len] = store[:store_len]
            store = grown
        store[store_len:store_len + la] = work[:la]
        owner_start[piv] = store_len
        owner_len[piv] = la
        store_len += la
        pivots[rank] = piv
        rank += 1
    return rank, skipped, pivots[:rank].copy()


class DirectedFlagComplex:
    """Directed flag complex of a digraph, enumerated up to ``max_dim``.

    ``counts[d]`` is the number ``gamma_d`` of ``d``-simplices.  Simplices
    are stored for dimensions ``<= stored_dim``; higher dimensions up to
    ``max_dim`` are counted only.
    """

    def __init__(self, g: DirectedGraph, max_dim: int, stored_dim: int | None = None):
        if max_dim < 0:
            raise ValueError("max_dim must be nonnegative")
        stored_dim = max_dim if stored_dim is None else min(stored_dim, max_dim)
        self.n = g.n
        self.max_dim = max_dim
        self.stored_dim = stored_dim
        bits = adjacency_bits(g) if g.n else np.zeros((0, 1), dtype=np.uint64)
        dummy = np.zeros(1, dtype=np.int64)
        counts = _enumerate(bits, max_dim, stored_dim, False, dummy, dummy, dummy,
                            _DEBRUIJN_TABLE, _DEBRUIJN)
        offsets = np.zeros(stored_dim + 2, dtype=np.int64)
        np.cumsum(counts[:stored_dim + 1], out=offsets[1:])
        last = np.empty(offsets[-1], dtype=np.int64)
        parent = np.empty(offsets[-1], dtype=np.int64)
        _enumerate(bits, max_dim, stored_dim, True, offsets, last, parent, _DEBRUIJN_TABLE, _DEBRUIJN)
        self.counts = counts
        self._offsets = offsets
        self._last = last
        self._parent = parent
        # child pointers: level j maps a (j-1)-simplex to its block of j-simplices
        ptrs = [np.zeros(1, dtype=np.int64)]
        for j in range(1, stored_dim + 1):
            ptrs.append(_child_ptr(parent[offsets[j]:offsets[j + 1]], counts[j - 1]))
        self._cptr_off = np.zeros(stored_dim + 2, dtype=np.int64)
        np.cumsum([len(p) for p in ptrs], out=self._cptr_off[1:])
        self._cptr = np.concatenate(ptrs)

    @property
    def gamma(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.counts)

    def simplices(self, d: int) -> np.ndarray:
        """``(gamma_d, d+1)`` array of the ``d``-simplices in lexicographic order."""
        if d > self.stored_dim:
            raise ValueError(f"dimension {d} was counted but not stored")
        m = int(self.counts[d])
        out = np.empty((m, d + 1), dtype=np.int64)
        idx = np.arange(m)
        for j in range(d, -1, -1):
            out[:, j] = self._last[self._offsets[j] + idx]
            idx = self._parent[self._offsets[j] + idx]
        return out

    def index_of(self, simplex: Sequence[int]) -> int:
        key = np.asarray(simplex, dtype=np.int64)
        d = len(key) - 1
        i = _lookup(key, len(key), self._last, self._offsets, self._cptr, self._cptr_off)
        if i >= self.counts[d] or not np.array_equal(self.simplices_at(d, i), key):
            raise KeyError(tuple(simplex))
        return int(i)

    def simplices_at(self, d: int, i: int) -> np.ndarray:
        out = np.empty(d + 1, dtype=np.int64)
        _vertices(d, i, self._last, self._parent, self._offsets, out)
        return out

    def faces(self, d: int) -> np.ndarray:
        """``(gamma_d, d+1)`` face indices; column ``i`` removes vertex ``v_i``."""
        if d < 1:
            return np.empty((int(self.counts[0]), 0), dtype=np.int64)
        s = self.simplices(d)
        out = np.empty_like(s)
        for f in range(d + 1):
            keys = np.delete(s, f, axis=1)
            out[:, f] = [_lookup(k, d, self._last, self._offsets, self._cptr, self._cptr_off) for k in keys]
        return out

    def coboundary(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        """Coboundary ``(d-1)``-cochains to ``d``-cochains as CSR ``(ptr, rows)``.

        Column ``j`` lists, in increasing order, the ``d``-simplices having the
        ``j``-th ``(d-1)``-simplex as a face.  Requires ``1 <= d <= stored_dim``.
        """
        m, n_cols = int(self.counts[d]), int(self.counts[d - 1])
        flat = _all_faces(d, m, self._last, self._parent, self._offsets, self._cptr, self._cptr_off)
        order = np.argsort(flat, kind="stable")
        rows = (order // (d + 1)).astype(np.int64)
        ptr = np.zeros(n_cols + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=n_cols), out=ptr[1:])
        return ptr, rows

    def reduce(self, d: int, cleared: np.ndarray | None = None, budget: int = -1):
        """Column-reduce the coboundary into dimension ``d``; its rank is that of ``d_d``."""
        n_cols, n_rows = int(self.counts[d - 1]), int(self.counts[d])
        if cleared is None:
            cleared = np.zeros(n_cols, dtype=np.bool_)
        ptr, rows = self.coboundary(d)
        return _reduce(ptr, rows, n_cols, n_rows, cleared, int(budget))

    def __repr__(self):
        return f"DirectedFlagComplex(gamma={self.gamma})"


def build_flag_complex(g: DirectedGraph, max_dim: int) -> DirectedFlagComplex:
    """Enumerate the directed flag complex of ``g`` up to dimension ``max_dim``."""
    return DirectedFlagComplex(g, max_dim)


def simplex_counts(g: DirectedGraph, max_dim: int) -> np.ndarray:
    """``gamma_0..gamma_max_dim`` by a counting-only traversal (nothing is stored)."""
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    bits = adjacency_bits(g) if g.n else np.zeros((0, 1), dtype=np.uint64)
    dummy = np.zeros(1, dtype=np.int64)
    return _enumerate(bits, max_dim, max_dim - 1, False, dummy, dummy, dummy, _DEBRUIJN_TABLE, _DEBRUIJN)


@dataclass(frozen=True)
class BettiResult:
    """Betti numbers ``beta_0..beta_p``, exact or bracketed.

    ``lower[d] <= beta_d <= upper[d]``; the result is exact when the two
    agree in every dimension.
    """

    lower: tuple[int, ...]
    upper: tuple[int, ...]
    eps: float = math.inf

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def betti(self) -> tuple[int, ...]:
        if not self.exact:
            raise ValueError("Betti numbers are only known up to intervals; use lower/upper/midpoint")
        return self.lower

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(u - l for l, u in zip(self.lower, self.upper))

    def midpoint(self) -> tuple[int, ...]:
        """Interval midpoints rounded half up."""
        return tuple(int(math.floor((l + u) / 2 + 0.5)) for l, u in zip(self.lower, self.upper))

    def intervals(self) -> list[tuple[int, int]]:
        return list(zip(self.lower, self.upper))


def _betti(K: DirectedFlagComplex, max_dim: int, budget: int, eps) -> BettiResult:
    top = max_dim + 1
    if K.stored_dim < min(top, K.max_dim) or K.max_dim < top:
        # rank of d_{p+1} needs every (p+1)-simplex
        raise ValueError(f"complex must store dimension {top} to compute Betti numbers up to {max_dim}")
    gamma = [int(c) for c in K.counts[:top + 1]]
    rank_lo = [0] * (top + 2)
    rank_hi = [0] * (top + 2)
    cleared_cols = None
    for d in range(1, top + 1):
        cleared = np.zeros(gamma[d - 1], dtype=np.bool_)
        if cleared_cols is not None and len(cleared_cols):
            cleared[cleared_cols] = True
        rank, skipped, pivots = K.reduce(d, cleared, budget)
        rank_lo[d] = int(rank)
        rank_hi[d] = int(rank) + int(skipped)
        cleared_cols = pivots
    lower, upper = [], []
    for d in range(max_dim + 1):
        hi = gamma[d] - rank_lo[d] - rank_lo[d + 1]
        lo = max(0, gamma[d] - rank_hi[d] - rank_hi[d + 1])
        lower.append(lo)
        upper.append(hi)
    return BettiResult(tuple(lower), tuple(upper), eps)


def betti_numbers(K: DirectedFlagComplex, max_dim: int) -> BettiResult:
    """Exact F2 Betti numbers ``beta_0..beta_max_dim``.

    ``K`` must contain every simplex of dimension ``max_dim + 1``.
    """
    return _betti(K, max_dim, -1, math.inf)


def betti_numbers_approx(K: DirectedFlagComplex, max_dim: int, eps) -> BettiResult:
    """Budgeted reduction: a column needing more than ``eps`` additions is skipped.

    Dropping a column changes the rank of a boundary matrix by at most one,
    so each skipped column widens the intervals of the two adjacent Betti
    numbers by at most one.  ``eps=math.inf`` is the exact computation.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    budget = -1 if math.isinf(eps) else int(eps)
    return _betti(K, max_dim, budget, eps)


def log_clamp(x) -> np.ndarray:
    """Elementwise ``max(0, log x)`` with ``log 0`` treated as 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.maximum(0.0, np.log(x[pos]))
    return out


@dataclass(frozen=True)
class FeatureVector:
    kind: str
    values: tuple[float, ...]
    exact: bool = True

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)


def compute_betti(g: DirectedGraph, max_dim: int, eps=None) -> BettiResult:
    """Build the complex to ``max_dim + 1`` and compute (approximate) Betti numbers."""
    K = DirectedFlagComplex(g, max_dim + 1)
    if eps is None or math.isinf(eps):
        return betti_numbers(K, max_dim)
    return betti_numbers_approx(K, max_dim, eps)


def feature_vector(g: DirectedGraph, kind: str, p: int, eps=None) -> FeatureVector:
    """Log-clamped Betti vector ``b(G)`` or simplex-count vector ``c(G)`` of length ``p + 1``.

    Natural log.  Approximate Betti intervals contribute their rounded
    midpoint and the result is flagged non-exact.
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    if kind == KIND_SIMPLEX:
        return FeatureVector(kind, tuple(log_clamp(simplex_counts(g, p)).tolist()))
    if kind != KIND_BETTI:
        raise ValueError(f"unknown feature kind {kind!r}")
    res = compute_betti(g, p, eps)
    counts = res.lower if res.exact else res.midpoint()
    return FeatureVector(kind, tuple(log_clamp(counts).tolist()), res.exact)


def flag_record(g: DirectedGraph, p: int, eps=None) -> dict:
    """Simplex counts, Betti numbers (or intervals) and both feature vectors of ``g``."""
    K = DirectedFlagComplex(g, p + 1)
    res = betti_numbers(K, p) if eps is None or math.isinf(eps) else betti_numbers_approx(K, p, eps)
    gamma = [int(c) for c in K.counts[:p + 1]]
    rec = {"gamma": gamma, "eps": "inf" if eps is None or math.isinf(eps) else float(eps), "exact": res.exact}
    if res.exact:
        rec["betti"] = list(res.lower)
        counts = res.lower
    else:
        rec["intervals"] = [list(iv) for iv in res.intervals()]
        counts = res.midpoint()
    rec["b"] = log_clamp(counts).tolist()
    rec["c"] = log_clamp(gamma).tolist()
    return rec
