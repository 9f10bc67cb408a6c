"""Directed 3-graphlets: triad census, TriadEuclid, orbit degrees and TriadEMD.

The catalogue of the 13 connected 3-vertex digraphs and their 30 vertex
orbits is generated at import time from the 64 labelled triads rather than
hard-coded.  A labelled triad on vertices ``0, 1, 2`` is a 6-bit code whose
bits, most significant first, are the pairs ``(0,1), (0,2), (1,0), (1,2),
(2,0), (2,1)``; the canonical code of a class is the smallest code over the six
relabellings, and classes are numbered by ``(edge count, canonical code)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numba
import numpy as np

from .digraph import DirectedGraph
from .exceptions import EmptyGraphError, NotNormalizedError, OrbitOutOfRangeError

PAIRS = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))
PERMS = tuple(itertools.permutations(range(3)))
N_CLASSES = 13
N_ORBITS = 30


def _bit(pair) -> int:
    return 1 << (5 - PAIRS.index(pair))


def edges_of(code: int) -> list[tuple[int, int]]:
    return [p for p in PAIRS if code & _bit(p)]


def code_of(edges) -> int:
    c = 0
    for e in edges:
        c |= _bit(tuple(e))
    return c


def relabel(code: int, perm) -> int:
    """Code of the triad obtained by sending vertex ``i`` to ``perm[i]``."""
    return code_of((perm[u], perm[v]) for u, v in edges_of(code))


def is_connected(code: int) -> bool:
    linked = {frozenset(e) for e in edges_of(code)}
    return len(linked) >= 2


def canonical(code: int) -> int:
    return min(relabel(code, p) for p in PERMS)


@dataclass(frozen=True)
class TriadClass:
    index: int
    code: int
    automorphisms: tuple[tuple[int, int, int], ...]
    orbits: tuple[tuple[int, ...], ...]
    orbit_ids: tuple[int, ...]  # global orbit number of each local orbit

    @property
    def edges(self):
        return edges_of(self.code)

    @property
    def num_edges(self) -> int:
        return bin(self.code).count("1")

    def orbit_of_vertex(self, v: int) -> int:
        for orb, gid in zip(self.orbits, self.orbit_ids):
            if v in orb:
                return gid
        raise ValueError(v)


@dataclass
class TriadCatalog:
    """The 13 connected triad classes with automorphism groups and orbits.

    Attributes
    ----------
    classes : list of TriadClass
        Ordered by ``(edge count, canonical code)``.
    class_of_code : ndarray of shape (64,)
        Class index of every labelled triad, ``-1`` if disconnected.
    position_orbit : ndarray of shape (64, 3)
        Global orbit number of each vertex of every connected labelled triad.
    subgraph_orbits : ndarray of shape (64, 3, 30)
        ``[c, x, i]`` counts the connected sub-triads (edge subsets) of ``c``
        in which vertex ``x`` sits in orbit ``i``.
    """

    classes: list[TriadClass] = field(default_factory=list)
    class_of_code: np.ndarray = None
    position_orbit: np.ndarray = None
    subgraph_orbits: np.ndarray = None
    induced_orbits: np.ndarray = None

    @property
    def n_orbits(self) -> int:
        return sum(len(c.orbits) for c in self.classes)

    def orbit_class(self, orbit: int) -> TriadClass:
        for c in self.classes:
            if orbit in c.orbit_ids:
                return c
        raise OrbitOutOfRangeError(f"orbit {orbit} not in 0..{self.n_orbits - 1}")


def _build_catalog() -> TriadCatalog:
    canon = sorted({canonical(c) for c in range(64) if is_connected(c)},
                   key=lambda c: (bin(c).count("1"), c))
    classes = []
    next_orbit = 0
    for idx, code in enumerate(canon):
        aut = tuple(p for p in PERMS if relabel(code, p) == code)
        orbits = sorted({tuple(sorted({p[v] for p in aut})) for v in range(3)})
        ids = tuple(range(next_orbit, next_orbit + len(orbits)))
        next_orbit += len(orbits)
        classes.append(TriadClass(idx, code, aut, tuple(orbits), ids))
    index = {c.code: c for c in classes}

    class_of_code = np.full(64, -1, dtype=np.int64)
    position_orbit = np.full((64, 3), -1, dtype=np.int64)
    for code in range(64):
        if not is_connected(code):
            continue
        perm = next(p for p in PERMS if relabel(code, p) in index)
        cls = index[relabel(code, perm)]
        class_of_code[code] = cls.index
        for x in range(3):
            position_orbit[code, x] = cls.orbit_of_vertex(perm[x])

    subgraph = np.zeros((64, 3, next_orbit), dtype=np.int64)
    induced = np.zeros((64, 3, next_orbit), dtype=np.int64)
    for code in range(64):
        if class_of_code[code] < 0:
            continue
        for x in range(3):
            induced[code, x, position_orbit[code, x]] = 1
        sub = code
        while True:  # every submask of code, including code itself
            if class_of_code[sub] >= 0:
                for x in range(3):
                    subgraph[code, x, position_orbit[sub, x]] += 1
            if sub == 0:
                break
            sub = (sub - 1) & code

    cat = TriadCatalog(classes, class_of_code, position_orbit, subgraph, induced)
    assert len(cat.classes) == N_CLASSES, len(cat.classes)
    assert cat.n_orbits == N_ORBITS, cat.n_orbits
    return cat


CATALOG = _build_catalog()


@numba.njit(cache=True)
def _triad_scan(uptr, uidx, adj, class_of_code, orbit_table, want_orbits):
    """Visit every connected vertex triple once.

    A triple is reached from a centre ``v`` adjacent to both others; paths
    have a unique centre and triangles are taken only from their smallest
    vertex.
    """
    n = adj.shape[0]
    counts = np.zeros(13, dtype=np.int64)
    n_orb = orbit_table.shape[2]
    orbit_deg = np.zeros((n if want_orbits else 0, n_orb), dtype=np.int64)
    trip = np.empty(3, dtype=np.int64)
    for v in range(n):
        lo, hi = uptr[v], uptr[v + 1]
        for ia in range(lo, hi):
            a = uidx[ia]
            for ib in range(ia + 1, hi):
                b = uidx[ib]
                if adj[a, b] or adj[b, a]:
                    if v > a:  # neighbours are sorted, so a < b
                        continue
                # sort (v, a, b)
                trip[0] = v
                trip[1] = a
                trip[2] = b
                if trip[0] > trip[1]:
                    trip[0], trip[1] = trip[1], trip[0]
                if trip[1] > trip[2]:
                    trip[1], trip[2] = trip[2], trip[1]
                if trip[0] > trip[1]:
                    trip[0], trip[1] = trip[1], trip[0]
                x, y, z = trip[0], trip[1], trip[2]
                code = ((adj[x, y] << 5) | (adj[x, z] << 4) | (adj[y, x] << 3)
                        | (adj[y, z] << 2) | (adj[z, x] << 1) | adj[z, y])
                counts[class_of_code[code]] += 1
                if want_orbits:
                    for i in range(n_orb):
                        orbit_deg[x, i] += orbit_table[code, 0, i]
                        orbit_deg[y, i] += orbit_table[code, 1, i]
                        orbit_deg[z, i] += orbit_table[code, 2, i]
    return counts, orbit_deg


def _scan(g: DirectedGraph, want_orbits: bool, induced: bool = False):
    adj = g.adjacency_matrix().astype(np.int64)
    und = (adj | adj.T).astype(bool)
    uptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(und.sum(axis=1), out=uptr[1:])
    uidx = np.nonzero(und)[1].astype(np.int64)
    table = CATALOG.induced_orbits if induced else CATALOG.subgraph_orbits
    return _triad_scan(uptr, uidx, adj, CATALOG.class_of_code, table, want_orbits)


@dataclass(frozen=True)
class TriadCensus:
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.counts, dtype=dtype)


def triad_census(g: DirectedGraph) -> TriadCensus:
    """Counts of induced connected 3-vertex subgraphs per triad class."""
    counts, _ = _scan(g, want_orbits=False)
    return TriadCensus(tuple(int(c) for c in counts))


def triad_profile(census: TriadCensus) -> np.ndarray:
    """Proportions of each class; the zero vector for a triad-free graph."""
    counts = np.asarray(census.counts, dtype=np.float64)
    total = counts.sum()
    return counts / total if total > 0 else np.zeros_like(counts)


def triad_euclid(g1: DirectedGraph, g2: DirectedGraph) -> float:
    """Euclidean distance between triad profiles."""
    return float(np.linalg.norm(triad_profile(triad_census(g1)) - triad_profile(triad_census(g2))))


def orbit_degree_matrix(g: DirectedGraph, induced: bool = False) -> np.ndarray:
    """``(n, 30)`` orbit degrees of every vertex.

    By default copies are subgraphs (any edge subset of a connected triple
    forming a connected triad); ``induced=True`` counts only induced triads.
    """
    _, deg = _scan(g, want_orbits=True, induced=induced)
    return deg


def orbit_degrees(g: DirectedGraph, orbit: int, induced: bool = False) -> np.ndarray:
    if not 0 <= orbit < N_ORBITS:
        raise OrbitOutOfRangeError(f"orbit {orbit} not in 0..{N_ORBITS - 1}")
    return orbit_degree_matrix(g, induced)[:, orbit]


def orbit_degree_distribution(degrees) -> np.ndarray:
    """``P[k]`` = fraction of vertices with degree ``k``; dense over ``0..max``."""
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.size == 0:
        raise EmptyGraphError("degree distribution of an empty vertex set")
    return np.bincount(degrees) / degrees.size


def _as_dense(P) -> np.ndarray:
    if isinstance(P, dict):
        out = np.zeros(max(P) + 1 if P else 0)
        for k, v in P.items():
            out[int(k)] += v
        return out
    return np.asarray(P, dtype=np.float64)


def emd_1d(P, Q, atol: float = 1e-9) -> float:
    """Earth mover distance between distributions on ``0, 1, 2, ...``.

    ``P`` and ``Q`` are dense arrays indexed by value or ``{value: mass}``
    dicts.  Equals the sum over integers of ``|F_P(x) - F_Q(x)|``.
    """
    p, q = _as_dense(P), _as_dense(Q)
    for name, d in (("P", p), ("Q", q)):
        if abs(d.sum() - 1.0) > atol or (d < -atol).any():
            raise NotNormalizedError(f"{name} is not a probability distribution (sums to {d.sum()})")
    m = max(len(p), len(q))
    fp = np.cumsum(np.pad(p, (0, m - len(p))))
    fq = np.cumsum(np.pad(q, (0, m - len(q))))
    return float(np.abs(fp - fq)[:-1].sum()) if m else 0.0


def orbit_distributions(g: DirectedGraph, induced: bool = False) -> list[np.ndarray]:
    if g.n == 0:
        raise EmptyGraphError("orbit-degree distributions need at least one vertex")
    deg = orbit_degree_matrix(g, induced)
    return [orbit_degree_distribution(deg[:, i]) for i in range(N_ORBITS)]


def triad_emd_from_distributions(d1, d2) -> float:
    return float(np.mean([emd_1d(p, q) for p, q in zip(d1, d2)]))


def triad_emd(g1: DirectedGraph, g2: DirectedGraph, induced: bool = False) -> float:
    """Mean over the 30 orbits of the EMD between orbit-degree distributions."""
    return triad_emd_from_distributions(orbit_distributions(g1, induced), orbit_distributions(g2, induced))
