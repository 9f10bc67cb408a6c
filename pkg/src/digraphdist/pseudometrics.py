"""Distance matrices over graph collections.

Supported metrics (``MetricSpec.name``):

``dbeta``
    Euclidean distance between log-clamped Betti vectors; ``eps`` switches
    to budgeted Betti numbers (interval midpoints).
``ddelta``
    Euclidean distance between log-clamped simplex-count vectors.
``triad_euclid``, ``triad_emd``, ``pd``
    Triad-profile Euclidean distance, mean orbit-degree EMD and Portrait
    Divergence.
``dparam``
    Absolute difference of generating parameters within one model.
``random``
    Symmetric uniform noise, a null baseline.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .digraph import DirectedGraph, atomic_write_text
from .exceptions import BadConfigError, MetricUnavailableError, MissingGraphError, ModelMismatchError
from .flag import KIND_BETTI, KIND_SIMPLEX, feature_vector
from .graphlets import orbit_distributions, triad_census, triad_emd_from_distributions, triad_profile
from .portrait import js_divergence, portrait, portrait_distribution
from .random_models import CollectionManifest, ManifestEntry

METRICS = ("dbeta", "ddelta", "triad_euclid", "triad_emd", "pd", "dparam", "random")
VECTOR_METRICS = ("dbeta", "ddelta", "triad_euclid")


@dataclass(frozen=True)
class MetricSpec:
    """A metric name plus the parameters that change its values."""

    name: str
    p: int = 6
    eps: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.name not in METRICS:
            raise BadConfigError(f"unknown metric {self.name!r}; choose from {', '.join(METRICS)}")
        if self.p < 0:
            raise BadConfigError("p must be nonnegative")
        if self.eps is not None and self.eps < 0:
            raise BadConfigError("eps must be nonnegative")

    @classmethod
    def parse(cls, text: str, p: int = 6, eps: float | None = None, seed: int = 0) -> "MetricSpec":
        """Parse ``name`` or ``name:key=value,...`` (keys ``p``, ``eps``, ``seed``)."""
        name, _, rest = text.partition(":")
        opts = {"p": p, "eps": eps, "seed": seed}
        for item in filter(None, rest.split(",")):
            key, _, value = item.partition("=")
            if key not in opts:
                raise BadConfigError(f"unknown metric option {key!r} in {text!r}")
            opts[key] = parse_eps(value) if key == "eps" else int(value)
        return cls(name, int(opts["p"]), opts["eps"], int(opts["seed"]))

    @property
    def label(self) -> str:
        """Short name used for files and table columns."""
        if self.name == "dbeta" and self.eps is not None and not math.isinf(self.eps):
            return f"dbeta-eps{self.eps:g}"
        return self.name

    def provenance(self) -> dict:
        prov = {"metric": self.name}
        if self.name in ("dbeta", "ddelta"):
            prov["p"] = self.p
        if self.name == "dbeta":
            prov["eps"] = _eps_str(self.eps)
        if self.name == "random":
            prov["seed"] = self.seed
        return prov


def parse_eps(value) -> float | None:
    if value is None or str(value).lower() in ("", "none", "inf", "exact"):
        return None
    return float(value)


def _eps_str(eps) -> str:
    return "inf" if eps is None or math.isinf(eps) else f"{eps:g}"


@dataclass
class DistanceMatrix:
    """Symmetric, nonnegative, zero-diagonal matrix over labelled graphs."""

    labels: list[str]
    D: np.ndarray
    metric: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = [str(x) for x in self.labels]
        self.D = np.asarray(self.D, dtype=np.float64)
        self.validate()

    def validate(self, atol: float = 1e-12) -> None:
        n = len(self.labels)
        if self.D.shape != (n, n):
            raise BadConfigError(f"{n} labels but matrix of shape {self.D.shape}")
        if len(set(self.labels)) != n:
            raise BadConfigError("labels must be unique")
        if not np.isfinite(self.D).all():
            raise BadConfigError("distances must be finite")
        if np.abs(np.diag(self.D)).max(initial=0) > atol:
            raise BadConfigError("diagonal must be zero")
        if np.abs(self.D - self.D.T).max(initial=0) > atol:
            raise BadConfigError("matrix must be symmetric")
        if self.D.min(initial=0) < -atol:
            raise BadConfigError("distances must be nonnegative")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.D, dtype=dtype)

    def __len__(self):
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def scaled(self, c: float) -> "DistanceMatrix":
        return DistanceMatrix(self.labels, self.D * c, self.metric, dict(self.provenance))

    def permuted(self, perm) -> "DistanceMatrix":
        perm = np.asarray(perm)
        return DistanceMatrix([self.labels[i] for i in perm], self.D[np.ix_(perm, perm)],
                              self.metric, dict(self.provenance))

    def subset(self, labels: Sequence[str]) -> "DistanceMatrix":
        pos = {x: i for i, x in enumerate(self.labels)}
        try:
            idx = [pos[x] for x in labels]
        except KeyError as exc:
            raise MissingGraphError(exc.args[0]) from None
        return DistanceMatrix(list(labels), self.D[np.ix_(idx, idx)], self.metric, dict(self.provenance))

    def to_csv(self, header: Mapping | None = None) -> str:
        """Optional ``# key: value`` comment lines, a row of ids, then the matrix."""
        buf = io.StringIO()
        for key, value in (header or {}).items():
            buf.write(f"# {key}: {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", *self.labels])
        for lab, row in zip(self.labels, self.D):
            w.writerow([lab, *(repr(float(x)) for x in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, metric: str = "") -> "DistanceMatrix":
        rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#")) if r]
        if not rows:
            raise BadConfigError("empty distance CSV")
        labels = rows[0][1:]
        if [r[0] for r in rows[1:]] != labels:
            raise BadConfigError("row ids must repeat the header ids in order")
        D = np.array([[float(x) for x in r[1:]] for r in rows[1:]]).reshape(len(labels), len(labels))
        return cls(labels, D, metric)

    def to_json(self) -> str:
        doc = {"metric": self.metric, "provenance": self.provenance, "labels": self.labels,
               "D": self.D.tolist()}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DistanceMatrix":
        doc = json.loads(text)
        return cls(doc["labels"], np.array(doc["D"], dtype=np.float64).reshape(len(doc["labels"]), -1),
                   doc.get("metric", ""), doc.get("provenance", {}))

    def save(self, path, header: Mapping | None = None) -> None:
        text = self.to_json() if str(path).endswith(".json") else self.to_csv(header)
        atomic_write_text(path, text)

    @classmethod
    def load(cls, path, metric: str = "") -> "DistanceMatrix":
        with open(path) as fh:
            text = fh.read()
        return cls.from_json(text) if str(path).endswith(".json") else cls.from_csv(text, metric)


# ---------------------------------------------------------------- features

def compute_feature(g: DirectedGraph, spec: MetricSpec):
    """Per-graph feature in a JSON-friendly form.

    Vectors for ``dbeta``, ``ddelta`` and ``triad_euclid``; a list of 30
    orbit-degree distributions for ``triad_emd``; the normalised portrait as
    nested lists for ``pd``.
    """
    if spec.name == "dbeta":
        return list(feature_vector(g, KIND_BETTI, spec.p, spec.eps).values)
    if spec.name == "ddelta":
        return list(feature_vector(g, KIND_SIMPLEX, spec.p).values)
    if spec.name == "triad_euclid":
        return triad_profile(triad_census(g)).tolist()
    if spec.name == "triad_emd":
        return [d.tolist() for d in orbit_distributions(g)]
    if spec.name == "pd":
        return portrait_distribution(portrait(g)).tolist()
    raise MetricUnavailableError(f"{spec.name} has no per-graph feature")


def _feature_job(args):
    g, spec = args
    return compute_feature(g, spec)


class FeatureCache:
    """On-disk JSON cache of per-graph features keyed by ``(graph id, metric, p, eps)``.

    The key also carries a fingerprint of the graph so a regenerated graph
    with the same id never reuses stale features.
    """

    def __init__(self, directory):
        self.directory = str(directory)
        os.makedirs(self.directory, exist_ok=True)

    @staticmethod
    def key(graph_id: str, spec: MetricSpec, g: DirectedGraph | None = None) -> str:
        parts = [graph_id, spec.name]
        if spec.name in ("dbeta", "ddelta"):
            parts.append(f"p{spec.p}")
        if spec.name == "dbeta":
            parts.append(f"eps{_eps_str(spec.eps)}")
        if g is not None:
            parts.append(graph_fingerprint(g)[:16])
        return "__".join(parts)

    def path(self, key: str) -> str:
        return os.path.join(self.directory, key + ".json")

    def get(self, key: str):
        try:
            with open(self.path(key)) as fh:
                return json.load(fh)["value"]
        except FileNotFoundError:
            return None

    def put(self, key: str, value) -> None:
        atomic_write_text(self.path(key), json.dumps({"key": key, "value": value}) + "\n")


def graph_fingerprint(g: DirectedGraph) -> str:
    h = hashlib.sha256(str(g.n).encode())
    h.update(np.ascontiguousarray(g.edges, dtype=np.int64).tobytes())
    return h.hexdigest()


def compute_features(graphs: Sequence[DirectedGraph], spec: MetricSpec, ids: Sequence[str] | None = None,
                     cache: FeatureCache | None = None, workers: int = 1) -> list:
    """Features for every graph, in input order, reading and filling ``cache``."""
    ids = [str(i) for i in range(len(graphs))] if ids is None else list(ids)
    out = [None] * len(graphs)
    todo = []
    for i, (gid, g) in enumerate(zip(ids, graphs)):
        value = cache.get(FeatureCache.key(gid, spec, g)) if cache else None
        if value is None:
            todo.append(i)
        else:
            out[i] = value
    jobs = [(graphs[i], spec) for i in todo]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_feature_job, jobs))
    else:
        results = [_feature_job(j) for j in jobs]
    for i, value in zip(todo, results):
        out[i] = value
        if cache:
            cache.put(FeatureCache.key(ids[i], spec, graphs[i]), value)
    return out


def pairwise_from_features(features: list, spec: MetricSpec) -> np.ndarray:
    n = len(features)
    if spec.name in VECTOR_METRICS:
        X = np.array(features, dtype=np.float64).reshape(n, -1)
        return cdist(X, X) if n else np.zeros((0, 0))
    if spec.name == "triad_emd":
        dists = [[np.asarray(p, dtype=np.float64) for p in f] for f in features]
        pair = triad_emd_from_distributions
    elif spec.name == "pd":
        dists = [np.asarray(f, dtype=np.float64) for f in features]
        pair = js_divergence
    else:
        raise MetricUnavailableError(f"{spec.name} is not computed from features")
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = pair(dists[i], dists[j])
    return D


# ---------------------------------------------------------------- matrices

def _entries(manifest) -> list[ManifestEntry] | None:
    if manifest is None:
        return None
    return list(manifest.entries if isinstance(manifest, CollectionManifest) else manifest)


def distance_matrix(manifest, graphs: Mapping[str, DirectedGraph] | None, spec: MetricSpec | str,
                    cache: FeatureCache | None = None, workers: int = 1,
                    ids: Sequence[str] | None = None) -> DistanceMatrix:
    """Distance matrix of ``spec`` over the collection.

    Parameters
    ----------
    manifest : CollectionManifest, sequence of ManifestEntry, or None
        Fixes the graph order; required for ``dparam``.
    graphs : mapping from id to DirectedGraph, optional
        Graphs already in memory.  Entries missing here are generated from
        the manifest.
    spec : MetricSpec or str
    ids : sequence of str, optional
        Order of the graphs when no manifest is given.
    """
    if isinstance(spec, str):
        spec = MetricSpec.parse(spec)
    entries = _entries(manifest)
    if entries is not None:
        ids = [e.id for e in entries]
    elif ids is None:
        if graphs is None:
            raise BadConfigError("need a manifest, graphs or ids")
        ids = list(graphs)
    ids = [str(i) for i in ids]
    prov = spec.provenance()

    if spec.name == "random":
        D = random_control(len(ids), spec.seed).D
        return DistanceMatrix(ids, D, spec.label, prov)
    if spec.name == "dparam":
        if entries is None:
            raise MetricUnavailableError("parameter distance needs a manifest")
        params = [e.param for e in entries]
        if len({e.model for e in entries}) > 1:
            raise ModelMismatchError("parameter distance is undefined across different models")
        p = np.asarray(params, dtype=np.float64)
        return DistanceMatrix(ids, np.abs(p[:, None] - p[None, :]), spec.label, prov)

    by_id = {e.id: e for e in entries} if entries is not None else {}
    glist = []
    for gid in ids:
        if graphs is not None and gid in graphs:
            glist.append(graphs[gid])
        elif gid in by_id:
            glist.append(by_id[gid].generate())
        else:
            raise MissingGraphError(gid)
    feats = compute_features(glist, spec, ids, cache, workers)
    D = pairwise_from_features(feats, spec)
    np.fill_diagonal(D, 0.0)
    return DistanceMatrix(ids, D, spec.label, prov)


def parameter_distance(manifest, i, j) -> float:
    """``|param_i - param_j|`` for two graphs of the same model.

    ``i`` and ``j`` are graph ids or positions in the manifest.
    """
    entries = _entries(manifest)

    def pick(x):
        if isinstance(x, ManifestEntry):
            return x
        if isinstance(x, (int, np.integer)):
            return entries[x]
        for e in entries:
            if e.id == x:
                return e
        raise MissingGraphError(x)

    a, b = pick(i), pick(j)
    if a.model != b.model:
        raise ModelMismatchError(f"{a.id} is {a.model} but {b.id} is {b.model}")
    return abs(a.param - b.param)


def random_control(n: int, seed: int, labels: Sequence[str] | None = None) -> DistanceMatrix:
    """Symmetric matrix with i.i.d. uniform(0, 1) off-diagonal entries and zero diagonal."""
    if n < 1:
        raise BadConfigError("random control needs n >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    U = rng.random((n, n))
    D = np.triu(U, k=1)
    D = D + D.T
    labels = [str(i) for i in range(n)] if labels is None else labels
    return DistanceMatrix(list(labels), D, "random", {"metric": "random", "seed": int(seed)})
