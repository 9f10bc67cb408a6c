"""Pseudometrics on directed graphs and the statistics to compare them.

Directed flag complex topology (Betti numbers and simplex counts), directed
3-graphlets, network portraits, seeded random digraph models and a
distance-matrix statistics toolkit.
"""

from .digraph import (
    DirectedGraph,
    bfs_distances,
    degrees,
    from_adjacency,
    from_edge_list,
    induced_subgraph,
    read_edge_list,
    write_edge_list,
)
from .estimators import (
    FlagFeatures,
    GraphDistance,
    KNNGraphClassifier,
    KNNGraphRegressor,
    SilhouetteLinkage,
    TriadProfile,
)
from .exceptions import DigraphDistError
from .flag import (
    BettiResult,
    DirectedFlagComplex,
    FeatureVector,
    betti_numbers,
    betti_numbers_approx,
    build_flag_complex,
    compute_betti,
    feature_vector,
    simplex_counts,
)
from .graphlets import (
    CATALOG,
    emd_1d,
    orbit_degree_distribution,
    orbit_degrees,
    triad_census,
    triad_emd,
    triad_euclid,
    triad_profile,
)
from .portrait import kl_divergence, portrait, portrait_distribution, portrait_divergence
from .pseudometrics import DistanceMatrix, MetricSpec, distance_matrix, parameter_distance, random_control
from .random_models import (
    CollectionManifest,
    ModelParams,
    gen_er,
    gen_gr,
    gen_interval_collection,
    gen_pa,
    gen_point_collection,
)
from .stats import (
    benjamini_yekutieli,
    bonferroni,
    choose_k,
    cut,
    dcor,
    fm_compare,
    fowlkes_mallows,
    hclust_complete,
    knn_classify_loo,
    knn_regress_loo,
    permutation_test,
    silhouette,
)

__version__ = "0.1.0"
