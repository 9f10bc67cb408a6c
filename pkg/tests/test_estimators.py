import math

import numpy as np
import pytest
from sklearn.base import clone

from digraphdist import distance_matrix, gen_point_collection
from digraphdist.estimators import (
    FlagFeatures,
    GraphDistance,
    KNNGraphClassifier,
    KNNGraphRegressor,
    SilhouetteLinkage,
    TriadProfile,
)
from digraphdist.exceptions import BadConfigError, BadKError, SizeMismatchError
from digraphdist.flag import feature_vector
from digraphdist.graphlets import triad_census, triad_profile
from digraphdist.stats import choose_k, knn_classify_loo
from digraphdist.validation import check_consistent_length, check_distance_matrix, check_graphs

from helpers import complete, cycle3, kite, path3, transitive3

GRAPHS = [cycle3(), transitive3(), complete(4), kite(), path3()]


@pytest.fixture(scope="module")
def collection():
    m = gen_point_collection(5, n=14, grid={"ER": (0.15, 0.5), "GR": (0.45,)}, per_param=4)
    return m, m.generate()


class TestValidation:
    def test_check_graphs(self):
        assert check_graphs(tuple(GRAPHS)) == GRAPHS
        with pytest.raises(BadConfigError):
            check_graphs(cycle3())
        with pytest.raises(BadConfigError):
            check_graphs([cycle3(), "nope"])

    def test_check_distance_matrix(self):
        assert check_distance_matrix([[0, 1], [1, 0]]).dtype == np.float64
        with pytest.raises(SizeMismatchError):
            check_distance_matrix([1, 2])
        with pytest.raises(SizeMismatchError):
            check_distance_matrix([[0, 1, 2], [1, 0, 3]])
        with pytest.raises(BadConfigError):
            check_distance_matrix([[0, np.nan], [np.nan, 0]])
        with pytest.raises(BadConfigError):
            check_distance_matrix([[0, 1], [2, 0]])
        assert check_distance_matrix([[0, 1, 2]], square=False).shape == (1, 3)

    def test_consistent_length(self):
        assert check_consistent_length([1, 2], "ab", None) == 2
        with pytest.raises(SizeMismatchError):
            check_consistent_length([1], [1, 2])


class TestTransformers:
    def test_flag_features(self):
        X = FlagFeatures(p=3).fit_transform(GRAPHS)
        assert X.shape == (5, 4)
        assert np.allclose(X[2], feature_vector(complete(4), "betti", 3).values)
        assert np.allclose(X[2], [0, 0, 0, math.log(9)])

    def test_simplex_kind(self):
        X = FlagFeatures(kind="simplex", p=2).fit_transform([complete(3)])
        assert np.allclose(X, [[math.log(3), math.log(6), math.log(6)]])

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            FlagFeatures(kind="torsion").fit(GRAPHS)

    def test_triad_profile(self):
        X = TriadProfile().fit_transform(GRAPHS)
        assert X.shape == (5, 13)
        assert np.allclose(X[3], triad_profile(triad_census(kite())))

    def test_clone_and_params(self):
        est = FlagFeatures(kind="simplex", p=4, eps=10.0)
        twin = clone(est)
        assert twin.get_params() == {"kind": "simplex", "p": 4, "eps": 10.0}
        assert twin.set_params(p=2).p == 2 and est.p == 4


class TestGraphDistance:
    @pytest.mark.parametrize("metric", ["dbeta", "ddelta", "triad_euclid", "triad_emd", "pd"])
    def test_matches_distance_matrix(self, metric):
        gd = GraphDistance(metric=metric)
        D = gd.fit_transform(GRAPHS)
        ref = distance_matrix(None, {str(i): g for i, g in enumerate(GRAPHS)}, metric).D
        assert np.allclose(D, ref, atol=1e-12)
        block = gd.transform(GRAPHS[:2])
        assert block.shape == (2, 5)
        assert np.allclose(block, ref[:2], atol=1e-12)

    def test_rejects_non_feature_metric(self):
        with pytest.raises(ValueError):
            GraphDistance(metric="random").fit(GRAPHS)

    def test_unfitted(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            GraphDistance().transform(GRAPHS)


class TestSilhouetteLinkage:
    def test_two_blobs(self):
        pts = np.array([0.0, 0.1, 0.2, 5.0, 5.1, 5.3])
        D = np.abs(pts[:, None] - pts[None, :])
        est = SilhouetteLinkage().fit(D)
        assert est.n_clusters_ == 2
        assert len(set(est.labels_[:3])) == 1 and est.labels_[0] != est.labels_[3]
        assert est.silhouette_ > 0.9

    def test_fixed_k(self, collection):
        m, graphs = collection
        D = distance_matrix(m, graphs, "ddelta").D
        assert SilhouetteLinkage(n_clusters=3).fit(D).n_clusters_ == 3
        assert SilhouetteLinkage().fit(D).n_clusters_ == choose_k(D)

    def test_fit_predict(self):
        D = np.array([[0, 1, 9], [1, 0, 9], [9, 9, 0.0]])
        labels = SilhouetteLinkage(n_clusters=2).fit_predict(D)
        assert labels[0] == labels[1] != labels[2]


class TestKNN:
    def test_classifier_loo_matches_stats(self, collection):
        m, graphs = collection
        D = distance_matrix(m, graphs, "dbeta").D
        y = [e.model for e in m.entries]
        clf = KNNGraphClassifier(n_neighbors=1).fit(D, y)
        assert list(clf.loo_predict(D)) == list(knn_classify_loo(D, y, 1, return_predictions=True)[1])

    def test_classifier_predict(self):
        D = np.array([[0, 1, 5, 6], [1, 0, 5, 6], [5, 5, 0, 1], [6, 6, 1, 0.0]])
        clf = KNNGraphClassifier(n_neighbors=1).fit(D, ["a", "a", "b", "b"])
        assert list(clf.predict([[0.5, 2, 9, 9], [9, 9, 2, 0.1]])) == ["a", "b"]
        assert clf.score([[0.5, 2, 9, 9]], ["a"]) == 1.0

    def test_regressor(self):
        D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0.0]])
        reg = KNNGraphRegressor(n_neighbors=2).fit(D, [1.0, 2.0, 4.0])
        assert list(reg.loo_predict(D)) == [3.0, 2.5, 1.5]
        assert list(reg.predict([[0, 1, 2]])) == [1.5]

    def test_vector_targets(self):
        D = np.array([[0, 1], [1, 0.0]])
        reg = KNNGraphRegressor(n_neighbors=1).fit(D, [[1, 2], [3, 4]])
        assert reg.loo_predict(D).tolist() == [[3, 4], [1, 2]]

    def test_errors(self):
        D = np.array([[0, 1], [1, 0.0]])
        with pytest.raises(BadKError):
            KNNGraphClassifier(n_neighbors=3).fit(D, [0, 1])
        with pytest.raises(SizeMismatchError):
            KNNGraphClassifier().fit(D, [0, 1, 2])
        clf = KNNGraphClassifier(n_neighbors=1).fit(D, [0, 1])
        with pytest.raises(BadKError):
            clf.predict([[0, 1, 2]])

    def test_pipeline_with_graph_distance(self, collection):
        m, graphs = collection
        gs = [graphs[i] for i in m.ids]
        y = [e.model for e in m.entries]
        gd = GraphDistance(metric="triad_euclid")
        D = gd.fit_transform(gs)
        clf = KNNGraphClassifier(n_neighbors=1).fit(D, y)
        assert list(clf.predict(gd.transform(gs))) == y
