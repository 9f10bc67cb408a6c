"""Simple directed graphs (bigons allowed, no self-loops) on vertices 0..n-1."""

from __future__ import annotations

import math
import os
from collections import deque
from collections.abc import Iterable, Sequence

import numpy as np

from .exceptions import GraphError, SelfLoopError, VertexOutOfRangeError

#: Distance reported for vertices that cannot be reached.
UNREACHABLE = math.inf


class DirectedGraph:
    """Immutable simple digraph.

    Vertices are the integers ``0..n-1``. Edges are ordered pairs ``(u, v)``
    with ``u != v``; both ``(u, v)`` and ``(v, u)`` may be present.

    Instances are normally built with :func:`from_edge_list`.
    """

    __slots__ = ("_n", "_edges", "_out_ptr", "_out_idx", "_in_ptr", "_in_idx", "_adj")

    def __init__(self, n: int, edges: np.ndarray):
        # ``edges`` must already be validated, deduplicated and lexicographically sorted.
        self._n = int(n)
        self._edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        self._edges.setflags(write=False)
        src, dst = self._edges[:, 0], self._edges[:, 1]
        self._out_ptr = _indptr(src, self._n)
        self._out_idx = dst.copy()
        order = np.lexsort((src, dst))
        self._in_ptr = _indptr(dst[order], self._n)
        self._in_idx = src[order]
        for arr in (self._out_ptr, self._out_idx, self._in_ptr, self._in_idx):
            arr.setflags(write=False)
        self._adj = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        """Read-only ``(m, 2)`` array of edges in lexicographic order."""
        return self._edges

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self._edges]

    def out_neighbors(self, v: int) -> np.ndarray:
        _check_vertex(v, self._n)
        return self._out_idx[self._out_ptr[v]:self._out_ptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        _check_vertex(v, self._n)
        return self._in_idx[self._in_ptr[v]:self._in_ptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency_matrix()[u, v])

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix, ``A[u, v]`` true iff ``u -> v``."""
        if self._adj is None:
            adj = np.zeros((self._n, self._n), dtype=bool)
            adj[self._edges[:, 0], self._edges[:, 1]] = True
            adj.setflags(write=False)
            self._adj = adj
        return self._adj

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Out-adjacency as ``(indptr, indices)``."""
        return self._out_ptr, self._out_idx

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self):
        return f"DirectedGraph(n={self._n}, num_edges={self.num_edges})"


def _indptr(sorted_keys: np.ndarray, n: int) -> np.ndarray:
    counts = np.bincount(sorted_keys, minlength=n) if len(sorted_keys) else np.zeros(n, dtype=np.int64)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr


def _check_vertex(v, n):
    if not (0 <= v < n):
        raise VertexOutOfRangeError(v, n)


def from_edge_list(n: int, pairs: Iterable[Sequence[int]]) -> DirectedGraph:
    """Build a digraph from ordered pairs.

    Duplicate pairs collapse to a single edge. Raises
    :class:`SelfLoopError` for ``(u, u)`` and :class:`VertexOutOfRangeError`
    for endpoints outside ``0..n-1``.
    """
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if len(arr):
        bad = (arr < 0) | (arr >= n)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise VertexOutOfRangeError(int(arr[i, j]), n)
        loops = arr[:, 0] == arr[:, 1]
        if loops.any():
            raise SelfLoopError(int(arr[np.argmax(loops), 0]))
        arr = np.unique(arr, axis=0)
    return DirectedGraph(n, arr)


def from_adjacency(adj) -> DirectedGraph:
    """Build a digraph from a square 0/1 matrix; the diagonal must be zero."""
    adj = np.asarray(adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise GraphError("adjacency matrix must be square")
    return from_edge_list(adj.shape[0], np.argwhere(adj != 0))


def empty_graph(n: int) -> DirectedGraph:
    return DirectedGraph(n, np.empty((0, 2), dtype=np.int64))


def degrees(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(out_degrees, in_degrees)``, each of length ``n``."""
    e = g.edges
    out = np.bincount(e[:, 0], minlength=g.n) if len(e) else np.zeros(g.n, dtype=np.int64)
    inn = np.bincount(e[:, 1], minlength=g.n) if len(e) else np.zeros(g.n, dtype=np.int64)
    return out, inn


def bfs_distances(g: DirectedGraph, v: int) -> list:
    """Directed shortest-path distances from ``v``.

    Unreachable vertices get :data:`UNREACHABLE`.
    """
    _check_vertex(v, g.n)
    ptr, idx = g.csr()
    dist = [UNREACHABLE] * g.n
    dist[v] = 0
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in idx[ptr[u]:ptr[u + 1]]:
            if dist[w] is UNREACHABLE:
                dist[w] = du
                queue.append(int(w))
    return dist


def induced_subgraph(g: DirectedGraph, vertices: Iterable[int]) -> DirectedGraph:
    """Subgraph on ``vertices``, relabeled ``0..|S|-1`` in increasing order."""
    keep = sorted(set(int(v) for v in vertices))
    for v in keep:
        _check_vertex(v, g.n)
    relabel = np.full(g.n, -1, dtype=np.int64)
    relabel[keep] = np.arange(len(keep))
    e = g.edges
    mask = (relabel[e[:, 0]] >= 0) & (relabel[e[:, 1]] >= 0)
    sub = relabel[e[mask]]
    return DirectedGraph(len(keep), sub[np.lexsort((sub[:, 1], sub[:, 0]))] if len(sub) else sub)


# -- edge-list text format ---------------------------------------------------

def parse_edge_list(text: str) -> DirectedGraph:
    """Parse ``n`` on the first line followed by ``u v`` lines (0-indexed)."""
    rows = [line.split("#", 1)[0].split() for line in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) != 1:
        raise GraphError("edge list must start with a single vertex-count line")
    pairs = []
    try:
        n = int(rows[0][0])
        for r in rows[1:]:
            if len(r) != 2:
                raise GraphError(f"expected 'u v', got {' '.join(r)!r}")
            pairs.append((int(r[0]), int(r[1])))
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    return from_edge_list(n, pairs)


def parse_labeled_edge_list(text: str) -> tuple[DirectedGraph, list[str]]:
    """Parse ``label label`` lines with arbitrary vertex labels.

    Labels are numbered in order of first appearance; the returned list maps
    vertex index back to the original label.
    """
    index: dict[str, int] = {}
    pairs = []
    for line in text.splitlines():
        r = line.split("#", 1)[0].split()
        if not r:
            continue
        if len(r) != 2:
            raise GraphError(f"expected 'u v', got {' '.join(r)!r}")
        u, v = (index.setdefault(x, len(index)) for x in r)
        pairs.append((u, v))
    return from_edge_list(len(index), pairs), list(index)


def format_edge_list(g: DirectedGraph) -> str:
    lines = [str(g.n)]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> DirectedGraph:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: DirectedGraph, path) -> None:
    atomic_write_text(path, format_edge_list(g))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary sibling and rename, so readers never see partial files."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
