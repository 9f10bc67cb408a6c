"""Comparison machinery for distance matrices.

Distance correlation, complete-linkage clustering with silhouette selection
of the cluster count, the Fowlkes-Mallows index, permutation tests with
multiple-testing corrections, and leave-one-out k-nearest-neighbour
classification and regression.  Every function accepts either a plain square
array or anything exposing one through ``np.asarray`` (such as
:class:`~digraphdist.pseudometrics.DistanceMatrix`).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import (
    BadAlphaError,
    BadClusteringError,
    BadKError,
    EmptyRangeError,
    NegativeDcovError,
    SizeMismatchError,
)

DCOV_TOL = 1e-12


def _square(D) -> np.ndarray:
    A = np.asarray(D, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SizeMismatchError(f"expected a square matrix, got shape {A.shape}")
    return A


def _same_size(a, b):
    if a.shape != b.shape:
        raise SizeMismatchError(f"matrices differ in shape: {a.shape} vs {b.shape}")


# ---------------------------------------------------------------- dCor

def double_center(D) -> np.ndarray:
    """``A[k, l] = a[k, l] - row_mean[k] - col_mean[l] + grand_mean``."""
    a = _square(D)
    return a - a.mean(axis=1, keepdims=True) - a.mean(axis=0, keepdims=True) + a.mean()


def dcov_sq(a, b) -> float:
    """Squared sample distance covariance ``mean(A * B)`` of centred matrices."""
    A, B = double_center(a), double_center(b)
    _same_size(A, B)
    return float((A * B).mean())


def dvar(D) -> float:
    """Sample distance variance ``sqrt(mean(A * A))``."""
    A = double_center(D)
    return math.sqrt(float((A * A).mean()))


def dcor(a, b, on_negative: str = "raise") -> float:
    """Sample distance correlation of two distance matrices on the same points.

    Returns 0 when either distance variance vanishes.  A squared covariance
    within ``1e-12`` below zero is treated as 0.  A more negative one (only
    possible when a matrix is not Euclidean-embeddable) raises
    :class:`NegativeDcovError`, or is reported as 0 with
    ``on_negative="zero"``.
    """
    if on_negative not in ("raise", "zero"):
        raise ValueError(f"on_negative must be 'raise' or 'zero', got {on_negative!r}")
    A, B = double_center(a), double_center(b)
    _same_size(A, B)
    return _dcor_centered(A, B, math.sqrt(float((A * A).mean())), math.sqrt(float((B * B).mean())),
                          on_negative)


def _dcor_centered(A, B, va, vb, on_negative: str = "raise") -> float:
    if va * vb == 0:
        return 0.0
    cov = float((A * B).mean())
    if cov < 0:
        if cov < -DCOV_TOL and on_negative == "raise":
            raise NegativeDcovError(f"negative squared distance covariance {cov:.3g}")
        cov = 0.0
    return min(1.0, math.sqrt(cov) / math.sqrt(va * vb))


# ---------------------------------------------------------------- clustering

@dataclass(frozen=True)
class Dendrogram:
    """Merge history of agglomerative clustering.

    ``merges[t] = (a, b, height)`` joins clusters ``a < b``; points are
    clusters ``0..n-1`` and the cluster created at step ``t`` is ``n + t``.
    """

    n: int
    merges: tuple[tuple[int, int, float], ...]
    method: str = "complete"

    @property
    def heights(self) -> np.ndarray:
        return np.array([h for _, _, h in self.merges])

    def to_linkage(self) -> np.ndarray:
        """SciPy-style ``(n-1, 4)`` linkage matrix."""
        size = [1] * self.n
        Z = np.zeros((len(self.merges), 4))
        for t, (a, b, h) in enumerate(self.merges):
            size.append(size[a] + size[b])
            Z[t] = (a, b, h, size[-1])
        return Z


@dataclass(frozen=True)
class Clustering:
    """Cluster ids ``0..k-1``, numbered by the smallest point of each cluster."""

    assignment: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(set(self.assignment))

    @property
    def n(self) -> int:
        return len(self.assignment)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.assignment, dtype=dtype)

    @classmethod
    def from_labels(cls, labels) -> "Clustering":
        """Renumber arbitrary labels by first appearance."""
        ids: dict = {}
        return cls(tuple(ids.setdefault(x, len(ids)) for x in labels))


def hclust_complete(D) -> Dendrogram:
    """Complete-linkage agglomerative clustering.

    At every step the two active clusters at minimum distance merge; ties go
    to the smallest ``(i, j)`` pair, where a cluster is represented by its
    smallest point.
    """
    a = _square(D)
    n = a.shape[0]
    if n == 0:
        raise BadClusteringError("cannot cluster zero points")
    M = a.copy()
    M[np.tril_indices(n)] = np.inf
    cid = list(range(n))  # current cluster id of each representative
    merges = []
    for t in range(n - 1):
        flat = int(np.argmin(M))  # first minimum in row-major order
        i, j = divmod(flat, n)
        h = float(M[i, j])
        merges.append((min(cid[i], cid[j]), max(cid[i], cid[j]), h))
        # complete linkage: distance to the union is the larger one
        row_full = np.maximum(_sym_row(M, i), _sym_row(M, j))
        M[:i, i] = row_full[:i]
        M[i, i + 1:] = row_full[i + 1:]
        M[:j, j] = np.inf
        M[j, :] = np.inf
        M[i, i] = np.inf
        cid[i] = n + t
    return Dendrogram(n, tuple(merges))


def _sym_row(M, i) -> np.ndarray:
    """Distances from representative ``i`` to every other, from the upper triangle."""
    out = np.empty(M.shape[0])
    out[:i] = M[:i, i]
    out[i:] = M[i, i:]
    out[i] = np.inf
    return out


def cut(dend: Dendrogram, k: int) -> Clustering:
    """Stop the merge sequence when ``k`` clusters remain."""
    n = dend.n
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n):
        raise BadKError(f"k must be an integer in [1, {n}], got {k}")
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, (a, b, _) in enumerate(dend.merges[: n - k]):
        parent[find(a)] = n + t
        parent[find(b)] = n + t
    return Clustering.from_labels(find(v) for v in range(n))


def silhouette(D, clustering) -> tuple[np.ndarray, float]:
    """Per-point silhouette values and their mean.

    Points in singleton clusters get 0, as does a point whose ``a`` and ``b``
    are both 0.  Needs at least two clusters.
    """
    a_mat = _square(D)
    labels = np.asarray(clustering, dtype=np.int64)
    n = a_mat.shape[0]
    if labels.shape != (n,):
        raise SizeMismatchError(f"{labels.shape[0]} labels for {n} points")
    ks = np.unique(labels)
    if len(ks) < 2:
        raise BadClusteringError("silhouette needs at least two clusters")
    onehot = labels[:, None] == ks[None, :]
    sizes = onehot.sum(axis=0)
    sums = a_mat @ onehot  # (n, k) total distance to each cluster
    own = np.searchsorted(ks, labels)
    own_size = sizes[own]
    s = np.zeros(n)
    multi = own_size > 1
    a = np.where(multi, sums[np.arange(n), own] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes[None, :]
    means[np.arange(n), own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    ok = multi & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return s, float(s.mean())


def default_k_range(n: int) -> range:
    return range(2, min(n - 1, 25) + 1)


def choose_k(D, k_range: Sequence[int] | None = None, dend: Dendrogram | None = None,
             tol: float = 1e-12) -> int:
    """Cluster count maximising the silhouette coefficient; ties go to the smallest ``k``."""
    a = _square(D)
    n = a.shape[0]
    ks = list(default_k_range(n) if k_range is None else k_range)
    if not ks:
        raise EmptyRangeError(f"no candidate cluster counts for n={n}")
    if any(not 2 <= k <= n - 1 for k in ks):
        raise BadKError(f"candidate k must lie in [2, {n - 1}]")
    dend = hclust_complete(a) if dend is None else dend
    scores = [silhouette(a, cut(dend, k))[1] for k in ks]
    best = max(scores)
    return min(k for k, s in zip(ks, scores) if s >= best - tol)


def pair_counts(A, B) -> tuple[int, int, int, int]:
    """``(TP, FP, FN, TN)`` over unordered point pairs; positives are pairs together in ``A``."""
    a = np.asarray(A, dtype=np.int64)
    b = np.asarray(B, dtype=np.int64)
    if a.shape != b.shape:
        raise SizeMismatchError(f"clusterings cover {a.size} and {b.size} points")
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max(initial=-1) + 1, bi.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(x):
        return int((x * (x - 1) // 2).sum())

    tp = pairs(table)
    together_a = pairs(table.sum(axis=1))
    together_b = pairs(table.sum(axis=0))
    fp = together_a - tp
    fn = together_b - tp
    tn = n * (n - 1) // 2 - tp - fp - fn
    return tp, fp, fn, tn


def fowlkes_mallows(A, B) -> float:
    """Geometric mean of pair precision and recall.

    0 when no pair is together in both clusterings, except that two
    all-singleton clusterings are identical and score 1.
    """
    tp, fp, fn, _ = pair_counts(A, B)
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    return math.sqrt(tp / (tp + fp) * tp / (tp + fn))


def _fm_setup(D_col, k_range=None):
    col = _square(D_col)
    n = col.shape[0]
    dend_col = hclust_complete(col)
    ks = default_k_range(n) if k_range is None else k_range
    k = choose_k(col, ks, dend_col) if len(ks) else n
    return k, cut(dend_col, k)


def fm_compare(D_row, D_col, k_range: Sequence[int] | None = None) -> float:
    """FM index of the row and column dendrograms, both cut at the column's silhouette ``k``.

    With fewer than three points there is no candidate ``k`` and both are
    cut into singletons.
    """
    row, col = _square(D_row), _square(D_col)
    _same_size(row, col)
    k, cl_col = _fm_setup(col, k_range)
    return fowlkes_mallows(cut(hclust_complete(row), k), cl_col)


# ---------------------------------------------------------------- permutation tests

@dataclass(frozen=True)
class TestResult:
    statistic: float
    n_perm: int
    p_value: float
    stat: str = "dcor"
    meta: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    """Generator for permutation replicate ``r``; independent of scheduling."""
    return np.random.default_rng([int(seed), int(r)])


def permutation_test(D1, D2, stat: str = "dcor", n_perm: int = 2000, seed: int = 0,
                     on_negative: str = "raise") -> TestResult:
    """Permute the points of ``D2`` and rank the observed statistic.

    ``p = (1 + #{permuted >= observed}) / (n_perm + 1)``.  For ``dcor`` the
    ranking uses the squared distance covariance, which orders permutations
    identically (both distance variances are permutation invariant) and
    stays defined when the covariance is negative; ``on_negative`` only
    affects the reported observed value, as in :func:`dcor`.  For ``fm`` the
    column clustering is computed once and its labels permuted.
    """
    a, b = _square(D1), _square(D2)
    _same_size(a, b)
    if n_perm < 1:
        raise BadKError("need at least one permutation")
    n = a.shape[0]
    if stat == "dcor":
        A, B = double_center(a), double_center(b)
        observed = _dcor_centered(A, B, math.sqrt(float((A * A).mean())), math.sqrt(float((B * B).mean())),
                                  on_negative)
        ref = float((A * B).mean())
        hits = 0
        for r in range(n_perm):
            pi = replicate_rng(seed, r).permutation(n)
            if float((A * B[np.ix_(pi, pi)]).mean()) >= ref - 1e-15 * max(1.0, abs(ref)):
                hits += 1
    elif stat == "fm":
        k, cl_col = _fm_setup(b)
        cl_row = cut(hclust_complete(a), k)
        observed = fowlkes_mallows(cl_row, cl_col)
        labels = np.asarray(cl_col)
        hits = 0
        for r in range(n_perm):
            pi = replicate_rng(seed, r).permutation(n)
            if fowlkes_mallows(cl_row, labels[pi]) >= observed - 1e-12:
                hits += 1
    else:
        raise ValueError(f"unknown statistic {stat!r}")
    return TestResult(observed, n_perm, (1 + hits) / (n_perm + 1), stat)


def _check_alpha(alpha):
    if not 0 < alpha <= 1:
        raise BadAlphaError(f"alpha must lie in (0, 1], got {alpha}")


def bonferroni(p_values, alpha: float = 0.05) -> np.ndarray:
    """Boolean rejection mask: ``p_i <= alpha / N``."""
    _check_alpha(alpha)
    p = np.asarray(p_values, dtype=np.float64)
    return p <= alpha / max(p.size, 1)


def by_constant(N: int) -> float:
    return float(sum(1.0 / j for j in range(1, N + 1)))


def benjamini_yekutieli(p_values, alpha: float = 0.05) -> np.ndarray:
    """Boolean rejection mask of the Benjamini-Yekutieli step-up procedure."""
    _check_alpha(alpha)
    p = np.asarray(p_values, dtype=np.float64)
    N = p.size
    reject = np.zeros(N, dtype=bool)
    if N == 0:
        return reject
    order = np.argsort(p, kind="stable")
    thresholds = np.arange(1, N + 1) * alpha / (N * by_constant(N))
    ok = np.nonzero(p[order] <= thresholds)[0]
    if ok.size:
        reject[order[: ok[-1] + 1]] = True
    return reject


# ---------------------------------------------------------------- k-NN

def loo_neighbors(D, k: int) -> np.ndarray:
    """``(n, k)`` nearest other points, by distance then index."""
    a = _square(D)
    n = a.shape[0]
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n - 1):
        raise BadKError(f"k must be an integer in [1, {n - 1}], got {k}")
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        others = np.delete(np.arange(n), i)
        order = np.argsort(a[i, others], kind="stable")
        out[i] = others[order[:k]]
    return out


def vote(labels: Sequence) -> object:
    """Most frequent label; ties go to whichever tied label comes first."""
    counts = Counter(labels)
    top = max(counts.values())
    return next(x for x in labels if counts[x] == top)


def knn_classify_loo(D, labels, k: int = 3, return_predictions: bool = False):
    """Leave-one-out k-NN classification rate."""
    labels = list(labels)
    nb = loo_neighbors(D, k)
    if len(labels) != nb.shape[0]:
        raise SizeMismatchError(f"{len(labels)} labels for {nb.shape[0]} points")
    pred = [vote([labels[j] for j in row]) for row in nb]
    rate = float(np.mean([p == y for p, y in zip(pred, labels)]))
    return (rate, pred) if return_predictions else rate


def knn_regress_loo(D, targets, k: int = 3, return_predictions: bool = False):
    """Leave-one-out k-NN regression; mean over points of the squared residual norm."""
    y = np.asarray(targets, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    nb = loo_neighbors(D, k)
    if y.shape[0] != nb.shape[0]:
        raise SizeMismatchError(f"{y.shape[0]} targets for {nb.shape[0]} points")
    pred = y[nb].mean(axis=1)
    mse = float(((pred - y) ** 2).sum(axis=1).mean())
    return (mse, pred) if return_predictions else mse
