"""Small named digraphs and hypothesis strategies shared by the tests."""

import numpy as np
from hypothesis import strategies as st

from digraphdist import from_edge_list


def cycle3():
    return from_edge_list(3, [(0, 1), (1, 2), (2, 0)])


def bigon():
    return from_edge_list(2, [(0, 1), (1, 0)])


def transitive3():
    return from_edge_list(3, [(0, 1), (0, 2), (1, 2)])


def complete(n):
    return from_edge_list(n, [(u, v) for u in range(n) for v in range(n) if u != v])


def path3():
    return from_edge_list(3, [(0, 1), (1, 2)])


def kite():
    """Four vertices: 0<->1, 0->2, 1->2, 1->3."""
    return from_edge_list(4, [(0, 1), (1, 0), (0, 2), (1, 2), (1, 3)])


@st.composite
def digraphs(draw, min_n=0, max_n=8, max_density=1.0):
    """Arbitrary simple digraphs (bigons allowed) on up to ``max_n`` vertices."""
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    rho = draw(st.floats(0.0, max_density))
    picks = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    bias = draw(st.randoms(use_true_random=False))
    chosen = [p for p, keep in zip(pairs, picks) if keep and bias.random() < rho]
    return from_edge_list(n, chosen)


@st.composite
def distance_matrices(draw, min_n=2, max_n=12):
    """Euclidean distance matrices of random point clouds (always L2-embeddable)."""
    n = draw(st.integers(min_n, max_n))
    dim = draw(st.integers(1, 3))
    coords = draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=n * dim, max_size=n * dim))
    X = np.round(np.array(coords), 3).reshape(n, dim)
    return np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
