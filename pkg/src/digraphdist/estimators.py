"""scikit-learn style wrappers.

Feature transformers map a list of :class:`DirectedGraph` to a feature
matrix; :class:`GraphDistance` maps graphs to distances against the graphs
seen in ``fit``; the clusterer and the k-NN models consume precomputed
distance matrices.  All of them follow the usual ``get_params`` /
``set_params`` contract, so they compose with ``Pipeline`` and ``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import BadKError
from .pseudometrics import MetricSpec, compute_features, pairwise_from_features
from .stats import choose_k, cut, hclust_complete, silhouette, vote
from .validation import check_consistent_length, check_distance_matrix, check_graphs


class FlagFeatures(TransformerMixin, BaseEstimator):
    """Log-clamped Betti (``kind="betti"``) or simplex-count vectors.

    Parameters
    ----------
    kind : {"betti", "simplex"}
    p : int
        Highest dimension; the output has ``p + 1`` columns.
    eps : float or None
        Reduction budget for approximate Betti numbers; None is exact.
    """

    def __init__(self, kind="betti", p=6, eps=None):
        self.kind = kind
        self.p = p
        self.eps = eps

    def fit(self, X, y=None):
        check_graphs(X)
        self._spec()
        self.n_features_out_ = self.p + 1
        return self

    def _spec(self) -> MetricSpec:
        if self.kind not in ("betti", "simplex"):
            raise ValueError(f"kind must be 'betti' or 'simplex', got {self.kind!r}")
        return MetricSpec("dbeta" if self.kind == "betti" else "ddelta", self.p, self.eps)

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        graphs = check_graphs(X)
        feats = compute_features(graphs, self._spec())
        return np.array(feats, dtype=np.float64).reshape(len(graphs), self.p + 1)


class TriadProfile(TransformerMixin, BaseEstimator):
    """Proportions of the 13 connected triad classes."""

    def fit(self, X, y=None):
        check_graphs(X)
        self.n_features_out_ = 13
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        graphs = check_graphs(X)
        feats = compute_features(graphs, MetricSpec("triad_euclid"))
        return np.array(feats, dtype=np.float64).reshape(len(graphs), 13)


class GraphDistance(TransformerMixin, BaseEstimator):
    """Distances from query graphs to the reference graphs given to ``fit``.

    ``transform`` returns an ``(n_queries, n_references)`` block, the input
    that precomputed-distance models such as :class:`KNNGraphClassifier`
    expect.

    Parameters
    ----------
    metric : {"dbeta", "ddelta", "triad_euclid", "triad_emd", "pd"}
    p : int
    eps : float or None
    """

    def __init__(self, metric="dbeta", p=6, eps=None):
        self.metric = metric
        self.p = p
        self.eps = eps

    def _spec(self) -> MetricSpec:
        spec = MetricSpec(self.metric, self.p, self.eps)
        if spec.name in ("dparam", "random"):
            raise ValueError(f"{spec.name} is not a graph feature metric")
        return spec

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        self.reference_features_ = compute_features(graphs, self._spec())
        self.n_references_ = len(graphs)
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_features_")
        graphs = check_graphs(X)
        spec = self._spec()
        feats = compute_features(graphs, spec)
        joint = pairwise_from_features(feats + list(self.reference_features_), spec)
        return joint[: len(graphs), len(graphs):]

    def fit_transform(self, X, y=None):
        self.fit(X)
        n = self.n_references_
        D = pairwise_from_features(list(self.reference_features_), self._spec())
        np.fill_diagonal(D, 0.0)
        return D.reshape(n, n)


class SilhouetteLinkage(ClusterMixin, BaseEstimator):
    """Complete-linkage clustering of a precomputed distance matrix.

    The cluster count is ``n_clusters`` if given, otherwise the silhouette
    maximiser over ``k_range`` (default ``2..min(n-1, 25)``).
    """

    def __init__(self, n_clusters=None, k_range=None):
        self.n_clusters = n_clusters
        self.k_range = k_range

    def fit(self, X, y=None):
        D = check_distance_matrix(X)
        self.dendrogram_ = hclust_complete(D)
        k = self.n_clusters if self.n_clusters is not None else choose_k(D, self.k_range, self.dendrogram_)
        self.n_clusters_ = int(k)
        self.labels_ = np.asarray(cut(self.dendrogram_, self.n_clusters_), dtype=np.int64)
        self.silhouette_ = silhouette(D, self.labels_)[1] if self.n_clusters_ > 1 else 0.0
        return self


class _PrecomputedKNN(BaseEstimator):
    def __init__(self, n_neighbors=3):
        self.n_neighbors = n_neighbors

    def _fit(self, X, y):
        D = check_distance_matrix(X)
        check_consistent_length(D, y)
        if not 1 <= self.n_neighbors <= len(D):
            raise BadKError(f"n_neighbors must lie in [1, {len(D)}]")
        self.n_train_ = len(D)
        return D

    def _neighbors(self, X):
        check_is_fitted(self, "n_train_")
        D = check_distance_matrix(X, square=False)
        if D.shape[1] != self.n_train_:
            raise BadKError(f"expected distances to {self.n_train_} training points, got {D.shape[1]}")
        return np.argsort(D, axis=1, kind="stable")[:, : self.n_neighbors]

    def loo_neighbors(self, D):
        """Neighbours of every training point among the others (self excluded)."""
        D = check_distance_matrix(D).copy()
        np.fill_diagonal(D, np.inf)
        return np.argsort(D, axis=1, kind="stable")[:, : self.n_neighbors]


class KNNGraphClassifier(ClassifierMixin, _PrecomputedKNN):
    """k-NN majority vote on precomputed distances; vote ties go to the nearest tied label."""

    def fit(self, X, y):
        self._fit(X, y)
        self.y_ = np.asarray(y)
        self.classes_ = np.unique(self.y_)
        return self

    def predict(self, X):
        nb = self._neighbors(X)
        return np.array([vote(list(self.y_[row])) for row in nb])

    def loo_predict(self, D):
        check_is_fitted(self, "y_")
        return np.array([vote(list(self.y_[row])) for row in self.loo_neighbors(D)])


class KNNGraphRegressor(RegressorMixin, _PrecomputedKNN):
    """k-NN mean of (possibly vector) targets on precomputed distances."""

    def fit(self, X, y):
        self._fit(X, y)
        self.y_ = np.asarray(y, dtype=np.float64)
        return self

    def predict(self, X):
        return self.y_[self._neighbors(X)].mean(axis=1)

    def loo_predict(self, D):
        check_is_fitted(self, "y_")
        return self.y_[self.loo_neighbors(D)].mean(axis=1)
