"""Seeded random digraph families and the test-collection recipes built on them.

Three families are provided:

* ``ER`` -- each ordered pair ``(u, v)`` is an edge independently with
  probability ``rho``.
* ``GR`` -- biased oriented geometric graphs: points uniform in the unit
  square, an undirected edge whenever two points are within ``r``, then each
  edge ``uv`` with ``u < v`` is oriented ``u -> v`` with probability 1/3 and
  ``v -> u`` otherwise.
* ``PA`` -- k-out preferential attachment with parallel edges collapsed.

Every generator takes an integer seed and draws from a NumPy ``PCG64``
stream, so ``(params, seed)`` fully determines the output.  Collections derive
one seed per graph from ``(collection seed, graph id)`` with SHA-256, so a
manifest entry can be regenerated on its own, in any order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .digraph import DirectedGraph, atomic_write_text, empty_graph, from_edge_list
from .exceptions import BadConfigError, BadParamError

MODELS = ("ER", "GR", "PA")

POINT_GRID = {
    "ER": (0.03, 0.06, 0.1, 0.15, 0.2, 0.25),
    "GR": (0.1, 0.175, 0.3),
    "PA": (20, 40, 70),
}

INTERVAL_GRID = {
    "ER": ((0.0, 0.01), (0.02, 0.03), (0.05, 0.07), (0.09, 0.1)),
    "GR": ((0.0, 0.02), (0.04, 0.05), (0.08, 0.12), (0.15, 0.175)),
    "PA": ((4, 7), (12, 18), (22, 25), (27, 30)),
}


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(collection_seed: int, graph_id: str) -> int:
    """Per-graph seed: first 8 bytes of SHA-256 over ``"<seed>/<id>"``."""
    digest = hashlib.sha256(f"{int(collection_seed)}/{graph_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def gen_er(n: int, rho: float, seed: int) -> DirectedGraph:
    """Directed Erdos-Renyi graph; ``u -> v`` and ``v -> u`` are independent."""
    if n < 0 or not (0.0 <= rho <= 1.0):
        raise BadParamError(f"ER needs n >= 0 and 0 <= rho <= 1, got n={n}, rho={rho}")
    mask = _rng(seed).random((n, n)) < rho
    np.fill_diagonal(mask, False)
    return DirectedGraph(n, np.argwhere(mask))


def gen_gr(n: int, r: float, seed: int) -> DirectedGraph:
    """Biased oriented geometric random graph in the unit square."""
    if n < 0 or not (r >= 0):
        raise BadParamError(f"GR needs n >= 0 and r >= 0, got n={n}, r={r}")
    rng = _rng(seed)
    pts = rng.random((n, 2))
    if n < 2:
        return empty_graph(n)
    iu, ju = np.triu_indices(n, k=1)
    d2 = ((pts[iu] - pts[ju]) ** 2).sum(axis=1)
    close = d2 <= r * r
    u, v = iu[close], ju[close]
    forward = rng.random(len(u)) < 1.0 / 3.0
    src = np.where(forward, u, v)
    dst = np.where(forward, v, u)
    return from_edge_list(n, np.column_stack([src, dst]))


def gen_pa(n: int, k: int, seed: int, *, return_multigraph: bool = False):
    """k-out preferential attachment digraph.

    All weights start at 1.  Until every vertex has out-degree ``k``: choose
    ``u`` uniformly among vertices whose out-degree is still below ``k``,
    choose ``v != u`` with probability proportional to its weight, add
    ``u -> v`` and increment the weight of ``v``.  Parallel edges are then
    collapsed, so final out-degrees are at most ``k``.

    With ``return_multigraph=True`` the pre-collapse edge array is returned
    alongside the graph.
    """
    if not (isinstance(k, (int, np.integer)) and 1 <= k < n):
        raise BadParamError(f"PA needs integer 1 <= k < n, got n={n}, k={k}")
    k = int(k)
    rng = _rng(seed)
    weight = np.ones(n, dtype=np.float64)
    active = list(range(n))
    outdeg = np.zeros(n, dtype=np.int64)
    edges = np.empty((n * k, 2), dtype=np.int64)
    for t in range(n * k):
        pos = int(rng.integers(len(active)))
        u = active[pos]
        w = weight.copy()
        w[u] = 0.0
        cum = np.cumsum(w)
        # n >= 2 guarantees some other vertex carries positive weight
        assert cum[-1] > 0
        v = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        assert v != u
        edges[t] = (u, v)
        weight[v] += 1.0
        outdeg[u] += 1
        if outdeg[u] == k:
            active[pos] = active[-1]
            active.pop()
    g = from_edge_list(n, edges)
    return (g, edges) if return_multigraph else g


GENERATORS = {"ER": gen_er, "GR": gen_gr, "PA": gen_pa}


@dataclass(frozen=True)
class ModelParams:
    model: str
    param: float
    n: int

    def __post_init__(self):
        if self.model not in MODELS:
            raise BadParamError(f"unknown model {self.model!r}")
        if self.model == "ER" and not 0 <= self.param <= 1:
            raise BadParamError(f"rho must lie in [0, 1], got {self.param}")
        if self.model == "GR" and not 0 <= self.param <= math.sqrt(2):
            raise BadParamError(f"r must lie in [0, sqrt(2)], got {self.param}")
        if self.model == "PA" and not (float(self.param).is_integer() and 1 <= self.param < self.n):
            raise BadParamError(f"k must be an integer in [1, n), got {self.param}")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    model: str
    param: float
    n: int
    seed: int

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.model, self.param, self.n)

    def generate(self) -> DirectedGraph:
        param = int(self.param) if self.model == "PA" else float(self.param)
        return GENERATORS[self.model](self.n, param, self.seed)


@dataclass
class CollectionManifest:
    entries: list[ManifestEntry]
    kind: str = "custom"
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise BadConfigError("graph ids in a manifest must be unique")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def by_id(self, graph_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.id == graph_id:
                return e
        raise KeyError(graph_id)

    def subset(self, predicate) -> "CollectionManifest":
        return CollectionManifest([e for e in self.entries if predicate(e)], self.kind, self.seed, dict(self.meta))

    def generate(self) -> dict[str, DirectedGraph]:
        return {e.id: e.generate() for e in self.entries}

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "seed": self.seed,
            "meta": self.meta,
            "entries": [asdict(e) for e in self.entries],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CollectionManifest":
        doc = json.loads(text)
        if isinstance(doc, list):  # bare array of entries
            doc = {"entries": doc}
        try:
            entries = [ManifestEntry(e["id"], e["model"], float(e["param"]), int(e["n"]), int(e["seed"]))
                       for e in doc["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise BadConfigError(f"malformed manifest: {exc}") from None
        return cls(entries, doc.get("kind", "custom"), doc.get("seed"), doc.get("meta", {}))

    def save(self, path) -> None:
        atomic_write_text(path, self.to_json())

    @classmethod
    def load(cls, path) -> "CollectionManifest":
        with open(path) as fh:
            return cls.from_json(fh.read())


def _fmt(x) -> str:
    return f"{x:g}"


def gen_point_collection(seed: int, n: int = 500, per_param: int = 10,
                         grid: dict | None = None) -> CollectionManifest:
    """Point-drawn collection: ``per_param`` graphs for every grid value.

    The default grid gives 60 ER, 30 GR and 30 PA graphs.
    """
    grid = POINT_GRID if grid is None else grid
    _check_grid(grid)
    entries = []
    for model in MODELS:
        for value in grid.get(model, ()):
            for rep in range(per_param):
                gid = f"{model}-{_fmt(value)}-{rep:02d}"
                entry = ManifestEntry(gid, model, float(value), n, derive_seed(seed, gid))
                entry.params  # validate
                entries.append(entry)
    return CollectionManifest(entries, "point", seed, {"n": n, "per_param": per_param})


def gen_interval_collection(seed: int, n: int = 500, per_interval: int = 25,
                            grid: dict | None = None) -> CollectionManifest:
    """Interval-drawn collection: ``per_interval`` uniform draws per interval.

    Draw order is fixed (model, then interval, then draw).  ER and GR
    parameters are uniform reals on the open interval; PA out-degree caps are
    uniform integers on the closed integer range ``[lo, hi]``.
    """
    grid = INTERVAL_GRID if grid is None else grid
    _check_grid(grid)
    rng = _rng(seed)
    entries = []
    for model in MODELS:
        for j, (lo, hi) in enumerate(grid.get(model, ())):
            if not lo < hi:
                raise BadConfigError(f"empty interval ({lo}, {hi}) for {model}")
            for t in range(per_interval):
                if model == "PA":
                    value = float(rng.integers(int(lo), int(hi) + 1))
                else:
                    value = float(lo + (hi - lo) * rng.random())
                    while value <= lo:  # keep draws strictly inside the open interval
                        value = float(lo + (hi - lo) * rng.random())
                gid = f"{model}-i{j}-{t:02d}"
                entry = ManifestEntry(gid, model, value, n, derive_seed(seed, gid))
                entry.params  # validate
                entries.append(entry)
    return CollectionManifest(entries, "interval", seed, {"n": n, "per_interval": per_interval})


def _check_grid(grid):
    unknown = set(grid) - set(MODELS)
    if unknown:
        raise BadConfigError(f"unknown models in grid: {sorted(unknown)}")


def materialize(manifest: CollectionManifest, directory) -> dict[str, str]:
    """Write one ``<id>.edges`` file per manifest entry; return id -> path."""
    import os

    from .digraph import write_edge_list

    os.makedirs(directory, exist_ok=True)
    paths = {}
    for e in manifest:
        path = os.path.join(directory, f"{e.id}.edges")
        write_edge_list(e.generate(), path)
        paths[e.id] = path
    return paths


def scaled_interval_grid(n: int, base_n: int = 500, er_factor: float | None = None) -> dict:
    """Interval grid rescaled from ``base_n`` to ``n`` vertices at fixed mean degree.

    Mean degree is ``n*rho`` for ER, roughly ``pi*r^2*n`` for GR and ``k``
    for PA, so ER intervals scale by ``base_n/n``, GR by its square root and
    PA is unchanged.  ``er_factor`` overrides the ER multiplier; dense ER
    graphs on few vertices have far larger flag complexes than sparse ones of
    the same mean degree on many vertices.
    """
    f = base_n / n
    fe = f if er_factor is None else er_factor
    return {
        "ER": tuple((_r(min(1.0, lo * fe)), _r(min(1.0, hi * fe))) for lo, hi in INTERVAL_GRID["ER"]),
        "GR": tuple((_r(lo * math.sqrt(f)), _r(min(math.sqrt(2), hi * math.sqrt(f))))
                    for lo, hi in INTERVAL_GRID["GR"]),
        "PA": INTERVAL_GRID["PA"],
    }


def _r(x: float) -> float:
    return round(x, 10)
