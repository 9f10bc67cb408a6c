"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .digraph import DirectedGraph
from .exceptions import BadConfigError, SizeMismatchError


def check_graphs(X) -> list[DirectedGraph]:
    """Return ``X`` as a list of graphs, rejecting anything else."""
    if isinstance(X, DirectedGraph):
        raise BadConfigError("expected a sequence of graphs, got a single graph")
    graphs = list(X)
    for i, g in enumerate(graphs):
        if not isinstance(g, DirectedGraph):
            raise BadConfigError(f"item {i} is {type(g).__name__}, not DirectedGraph")
    return graphs


def check_distance_matrix(D, *, square: bool = True, atol: float = 1e-9) -> np.ndarray:
    """Float array of finite nonnegative distances.

    With ``square=True`` the matrix must also be symmetric with a zero
    diagonal.  Rectangular query-by-reference blocks pass ``square=False``.
    """
    A = np.asarray(D, dtype=np.float64)
    if A.ndim != 2:
        raise SizeMismatchError(f"distance matrix must be 2-D, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise BadConfigError("distance matrix contains non-finite values")
    if A.size and A.min() < -atol:
        raise BadConfigError("distance matrix contains negative values")
    if square:
        if A.shape[0] != A.shape[1]:
            raise SizeMismatchError(f"distance matrix must be square, got {A.shape}")
        if A.size and np.abs(A - A.T).max() > atol:
            raise BadConfigError("distance matrix is not symmetric")
        if A.size and np.abs(np.diag(A)).max() > atol:
            raise BadConfigError("distance matrix has a nonzero diagonal")
    return A


def check_consistent_length(*arrays: Sequence) -> int:
    lengths = {len(a) for a in arrays if a is not None}
    if len(lengths) > 1:
        raise SizeMismatchError(f"inconsistent lengths {sorted(lengths)}")
    return lengths.pop() if lengths else 0
