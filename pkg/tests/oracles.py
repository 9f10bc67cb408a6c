"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports the computational modules of the package; the oracles
work on plain edge sets so that agreement is meaningful.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np


def edge_set(g) -> set[tuple[int, int]]:
    return {(int(u), int(v)) for u, v in g.edge_list()}


# ------------------------------------------------------------ flag complex

def brute_simplices(n: int, E: set, k: int) -> list[tuple[int, ...]]:
    """Ordered ``(k+1)``-tuples with an edge from every earlier to every later vertex."""
    out = []
    for tup in itertools.permutations(range(n), k + 1):
        if all((tup[i], tup[j]) in E for i in range(k + 1) for j in range(i + 1, k + 1)):
            out.append(tup)
    return sorted(out)


def brute_gamma(n: int, E: set, max_dim: int) -> list[int]:
    return [len(brute_simplices(n, E, k)) for k in range(max_dim + 1)]


def f2_rank(M: np.ndarray) -> int:
    """Rank over F2 by plain Gaussian elimination on a dense 0/1 matrix."""
    A = (np.asarray(M, dtype=np.uint8) & 1).copy()
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if A[r, c]), None)
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        for r in range(rows):
            if r != rank and A[r, c]:
                A[r] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def brute_betti(n: int, E: set, max_dim: int) -> list[int]:
    """Betti numbers from dense boundary matrices of the brute-force complex."""
    simp = [brute_simplices(n, E, k) for k in range(max_dim + 2)]
    ranks = [0] * (max_dim + 3)
    for d in range(1, max_dim + 2):
        index = {s: i for i, s in enumerate(simp[d - 1])}
        M = np.zeros((len(simp[d - 1]), len(simp[d])), dtype=np.uint8)
        for j, s in enumerate(simp[d]):
            for i in range(d + 1):
                M[index[s[:i] + s[i + 1:]], j] ^= 1
        ranks[d] = f2_rank(M) if M.size else 0
    return [len(simp[d]) - ranks[d] - ranks[d + 1] for d in range(max_dim + 1)]


# ------------------------------------------------------------ triads

def _relabel(E3, perm):
    return frozenset((perm[a], perm[b]) for a, b in E3)


def _connected3(E3) -> bool:
    und = {frozenset(e) for e in E3}
    if len(und) < 2:
        return False
    return len(set().union(*und)) == 3


def triad_key(E3) -> frozenset:
    """Isomorphism-class key of a labelled triad on {0,1,2}: all relabelings."""
    return frozenset(_relabel(E3, p) for p in itertools.permutations(range(3)))


def orbit_key(E3, x: int) -> tuple:
    """Class key plus the set of positions equivalent to ``x`` under automorphisms."""
    canon = min(sorted(_relabel(E3, p)) for p in itertools.permutations(range(3)))
    canon = frozenset(canon)
    # any relabeling taking E3 to the canonical representative
    perm = next(p for p in itertools.permutations(range(3)) if _relabel(E3, p) == canon)
    auts = [p for p in itertools.permutations(range(3)) if _relabel(canon, p) == canon]
    orbit = frozenset(a[perm[x]] for a in auts)
    return (tuple(sorted(canon)), tuple(sorted(orbit)))


def all_connected_triads() -> list[frozenset]:
    pairs = [(a, b) for a in range(3) for b in range(3) if a != b]
    out = []
    for mask in range(64):
        E3 = frozenset(p for i, p in enumerate(pairs) if mask >> i & 1)
        if _connected3(E3):
            out.append(E3)
    return out


def _local(E, trip):
    pos = {v: i for i, v in enumerate(trip)}
    return frozenset((pos[a], pos[b]) for a, b in E if a in pos and b in pos)


def brute_census_keys(n: int, E: set) -> dict:
    """``{class key: count}`` over induced connected 3-vertex subgraphs."""
    out: dict = {}
    for trip in itertools.combinations(range(n), 3):
        E3 = _local(E, trip)
        if _connected3(E3):
            key = triad_key(E3)
            out[key] = out.get(key, 0) + 1
    return out


def brute_orbit_degrees(n: int, E: set, induced: bool = False) -> list[dict]:
    """Per vertex ``{orbit key: count}`` over connected (sub)graph copies."""
    deg = [dict() for _ in range(n)]
    for trip in itertools.combinations(range(n), 3):
        E3 = _local(E, trip)
        subsets = [E3] if induced else [
            frozenset(s) for r in range(len(E3) + 1) for s in itertools.combinations(sorted(E3), r)]
        for S in subsets:
            if not _connected3(S):
                continue
            for x in range(3):
                key = orbit_key(S, x)
                deg[trip[x]][key] = deg[trip[x]].get(key, 0) + 1
    return deg


def emd_oracle(p: dict, q: dict) -> float:
    """Integral of |F_P - F_Q| computed point by point."""
    top = max(list(p) + list(q) + [0])
    total, fp, fq = 0.0, 0.0, 0.0
    for x in range(top + 1):
        fp += p.get(x, 0.0)
        fq += q.get(x, 0.0)
        total += abs(fp - fq)
    return total


# ------------------------------------------------------------ shortest paths and portraits

def bfs(n: int, E: set, s: int) -> list[float]:
    out_adj = {v: [] for v in range(n)}
    for u, v in sorted(E):
        out_adj[u].append(v)
    dist = [math.inf] * n
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in out_adj[u]:
            if dist[v] == math.inf:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def portrait_oracle(n: int, E: set) -> dict:
    """``{(l, k): count}`` with zero entries omitted, via hand BFS."""
    dists = [bfs(n, E, v) for v in range(n)]
    diam = max((int(d) for row in dists for d in row if d != math.inf), default=0)
    B = {}
    for l in range(diam + 1):
        for v in range(n):
            k = sum(1 for d in dists[v] if d == l)
            B[(l, k)] = B.get((l, k), 0) + 1
    return B


def portrait_divergence_oracle(n1, E1, n2, E2) -> float:
    def dist(n, E):
        B = portrait_oracle(n, E)
        W = {(l, k): k * c for (l, k), c in B.items() if k}
        tot = sum(W.values())
        return {key: w / tot for key, w in W.items()}

    P, Q = dist(n1, E1), dist(n2, E2)
    keys = set(P) | set(Q)
    M = {x: 0.5 * (P.get(x, 0) + Q.get(x, 0)) for x in keys}

    def kl(A):
        return sum(a * math.log2(a / M[x]) for x, a in A.items() if a > 0)

    return 0.5 * kl(P) + 0.5 * kl(Q)


# ------------------------------------------------------------ statistics

def dcor_oracle(a, b) -> float:
    """Distance correlation with explicit loops over the double-centring formula."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(a)

    def centred(m):
        row = [sum(m[k]) / n for k in range(n)]
        col = [sum(m[k][l] for k in range(n)) / n for l in range(n)]
        grand = sum(row) / n
        return [[m[k][l] - row[k] - col[l] + grand for l in range(n)] for k in range(n)]

    A, B = centred(a), centred(b)
    cov = sum(A[k][l] * B[k][l] for k in range(n) for l in range(n)) / n**2
    va = sum(x * x for r in A for x in r) / n**2
    vb = sum(x * x for r in B for x in r) / n**2
    if va * vb == 0:
        return 0.0
    return math.sqrt(max(cov, 0.0)) / math.sqrt(math.sqrt(va) * math.sqrt(vb))
