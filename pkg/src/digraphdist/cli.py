"""Command line driver: ``digraphdist <subcommand> [options]``.

Subcommands
-----------
generate   write a collection manifest and one edge-list file per graph
features   compute per-graph features (cached on disk)
dist       write one distance-matrix CSV per metric
compare    FM and dCor tables between row and column metrics
permtest   permutation p-values with Bonferroni and BY verdicts
knn        leave-one-out k-NN classification and regression tables
pipeline   all of the above in order

Every output is a pure function of the configuration and seed.  Files are
written to a temporary name and renamed into place.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from importlib import metadata

import numpy as np
import yaml

from .digraph import atomic_write_text, write_edge_list
from .exceptions import BadConfigError, DigraphDistError, MetricUnavailableError, NegativeDcovError
from .flag import flag_record
from .graphlets import orbit_distributions, triad_census, triad_profile
from .portrait import portrait
from .pseudometrics import (
    DistanceMatrix,
    FeatureCache,
    MetricSpec,
    compute_features,
    distance_matrix,
    graph_fingerprint,
    parse_eps,
)
from .random_models import MODELS, CollectionManifest, gen_interval_collection, gen_point_collection
from .stats import (
    benjamini_yekutieli,
    bonferroni,
    by_constant,
    dcor,
    fm_compare,
    knn_classify_loo,
    knn_regress_loo,
    permutation_test,
)

# desk-scale out-degree caps for the point collection on 100 vertices
DESK_PA_GRID = (10, 20, 30)
FEATURE_METRICS = ("dbeta", "ddelta", "triad_euclid", "triad_emd", "pd")


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class ExperimentConfig:
    """Resolved experiment settings.

    ``collection`` is ``"point"``, ``"interval"`` or a path to a manifest
    JSON file.  ``grid`` optionally overrides model parameter grids, e.g.
    ``{"PA": [10, 20, 30]}``.  ``eps`` lists the budgets for ``dbeta``;
    ``None`` stands for exact Betti numbers.
    """

    collection: str = "point"
    n: int = 100
    seed: int = 0
    grid: dict = field(default_factory=dict)
    per_param: int = 10
    per_interval: int = 25
    metrics: list = field(default_factory=lambda: list(FEATURE_METRICS))
    columns: list = field(default_factory=lambda: ["dbeta", "ddelta"])
    p: int = 6
    eps: list = field(default_factory=lambda: [None])
    perms: int = 2000
    alpha: float = 0.05
    knn_k: int = 3
    out: str = "results"
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.collection not in ("point", "interval") and not os.path.exists(self.collection):
            raise BadConfigError(f"collection {self.collection!r} is neither a recipe nor an existing manifest")
        if self.p < 0:
            raise BadConfigError("p must be nonnegative")
        if self.perms < 1:
            raise BadConfigError("perms must be at least 1")
        if self.knn_k < 1:
            raise BadConfigError("knn_k must be at least 1")
        if self.workers < 1:
            raise BadConfigError("workers must be at least 1")
        for m in list(self.metrics) + list(self.columns):
            MetricSpec.parse(str(m))
        unknown = set(self.grid) - set(MODELS)
        if unknown:
            raise BadConfigError(f"unknown models in grid: {sorted(unknown)}")
        return self

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise BadConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise BadConfigError(f"config {path} is not valid YAML/JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise BadConfigError("config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise BadConfigError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        if "eps" in doc:
            doc["eps"] = _eps_list(doc["eps"])
        for key in ("metrics", "columns"):
            if key in doc and isinstance(doc[key], str):
                doc[key] = _split(doc[key])
        cfg = cls(**doc)
        if cfg.collection not in ("point", "interval"):
            # manifest paths are relative to the config file
            cfg.collection = os.path.join(os.path.dirname(os.path.abspath(path)), cfg.collection)
        return cfg

    def public(self) -> dict:
        """Settings that determine outputs (the worker count does not)."""
        doc = asdict(self)
        doc.pop("workers")
        doc.pop("out")
        doc["eps"] = [_eps_label(e) for e in self.eps]
        return doc

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.public(), sort_keys=True).encode()).hexdigest()[:12]


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _eps_list(value) -> list:
    if value is None:
        return [None]
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        return [parse_eps(v) for v in _split(value)]
    return [parse_eps(v) for v in value]


def _eps_label(eps) -> str:
    return "inf" if eps is None else f"{eps:g}"


# ---------------------------------------------------------------- context

class Run:
    """Output directory, log and helpers shared by the subcommands."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.out = cfg.out
        os.makedirs(self.out, exist_ok=True)
        self.log_lines: list[str] = []
        self._manifest = None
        self._graphs = None
        self._dists: dict[str, DistanceMatrix] = {}

    # -- logging / writing
    def log(self, msg: str) -> None:
        self.log_lines.append(msg)

    def flush_log(self, command: str) -> None:
        head = [
            f"command: {command}",
            f"version: digraphdist {package_version()}",
            f"numpy: {np.__version__}",
            f"config: {json.dumps(self.cfg.public(), sort_keys=True)}",
            f"config_digest: {self.cfg.digest()}",
        ]
        atomic_write_text(self.path("run.log"), "\n".join(head + self.log_lines) + "\n")

    def path(self, *parts) -> str:
        p = os.path.join(self.out, *parts)
        os.makedirs(os.path.dirname(p), exist_ok=True)
        return p

    def header(self, **extra) -> dict:
        h = {"tool": f"digraphdist {package_version()}", "config": self.cfg.digest(), "seed": self.cfg.seed,
             "p": self.cfg.p, "eps": ",".join(_eps_label(e) for e in self.cfg.eps)}
        h.update(extra)
        return h

    def write_table(self, name: str, columns: list[str], rows: list[list], **extra) -> str:
        buf = io.StringIO()
        for k, v in self.header(**extra).items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(x) for x in r])
        path = self.path("tables", name)
        atomic_write_text(path, buf.getvalue())
        self.log(f"wrote {os.path.relpath(path, self.out)}")
        return path

    # -- data
    def manifest(self) -> CollectionManifest:
        if self._manifest is None:
            saved = self.path("manifest.json")
            if os.path.exists(saved):
                self._manifest = CollectionManifest.load(saved)
            else:
                self._manifest = build_manifest(self.cfg)
        return self._manifest

    def graphs(self):
        if self._graphs is None:
            self._graphs = self.manifest().generate()
        return self._graphs

    def specs(self) -> list[MetricSpec]:
        out = []
        for m in self.cfg.metrics:
            spec = MetricSpec.parse(str(m), p=self.cfg.p)
            if spec.name == "dbeta" and ":" not in str(m):
                out.extend(replace(spec, eps=e) for e in self.cfg.eps)
            else:
                out.append(spec)
        return _unique(out)

    def column_specs(self) -> list[MetricSpec]:
        out = []
        for m in self.cfg.columns:
            spec = MetricSpec.parse(str(m), p=self.cfg.p)
            if spec.name == "dbeta" and ":" not in str(m):
                spec = replace(spec, eps=self.cfg.eps[0])
            out.append(spec)
        return _unique(out)

    def cache(self) -> FeatureCache:
        return FeatureCache(os.path.join(self.out, "cache"))

    def dist(self, spec: MetricSpec) -> DistanceMatrix:
        if spec.label not in self._dists:
            seed_spec = replace(spec, seed=self.cfg.seed) if spec.name == "random" else spec
            if spec.name == "dparam":
                raise MetricUnavailableError("parameter distance is only defined within one model")
            D = distance_matrix(self.manifest(), self.graphs(), seed_spec, self.cache(), self.cfg.workers)
            self._dists[spec.label] = D
        return self._dists[spec.label]


def _unique(specs):
    seen, out = set(), []
    for s in specs:
        if s.label not in seen:
            seen.add(s.label)
            out.append(s)
    return out


def _cell(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    return x


def build_manifest(cfg: ExperimentConfig) -> CollectionManifest:
    if cfg.collection == "point":
        from .random_models import POINT_GRID

        grid = dict(POINT_GRID)
        if cfg.n < 500:
            grid["PA"] = DESK_PA_GRID
        grid.update({k: tuple(v) for k, v in cfg.grid.items()})
        return gen_point_collection(cfg.seed, cfg.n, cfg.per_param, grid)
    if cfg.collection == "interval":
        from .random_models import scaled_interval_grid

        grid = scaled_interval_grid(cfg.n, er_factor=3.0) if cfg.n < 500 else None
        if cfg.grid:
            grid = dict(grid or {})
            grid.update({k: tuple(tuple(iv) for iv in v) for k, v in cfg.grid.items()})
        return gen_interval_collection(cfg.seed, cfg.n, cfg.per_interval, grid)
    return CollectionManifest.load(cfg.collection)


def slices(manifest: CollectionManifest) -> list[tuple[str, list[str]]]:
    """``("all", ids)`` followed by one slice per model present."""
    out = [("all", manifest.ids)]
    for model in MODELS:
        ids = [e.id for e in manifest if e.model == model]
        if ids:
            out.append((model, ids))
    return out


def slice_dist(run: Run, spec: MetricSpec, name: str, ids: list[str]) -> DistanceMatrix:
    if spec.name == "dparam":
        if name == "all" and len({e.model for e in run.manifest()}) > 1:
            raise MetricUnavailableError("parameter distance across models")
        sub = run.manifest().subset(lambda e: e.id in set(ids))
        return distance_matrix(sub, None, spec)
    return run.dist(spec).subset(ids)


# ---------------------------------------------------------------- subcommands

def cmd_generate(run: Run) -> None:
    """Build the collection manifest and write one edge list per graph."""
    m = build_manifest(run.cfg)
    m.save(run.path("manifest.json"))
    run._manifest = m
    for e in m:
        write_edge_list(e.generate(), run.path("graphs", f"{e.id}.edges"))
    run.log(f"generated {len(m)} graphs ({m.kind}, seed {m.seed})")
    for e in m:
        run.log(f"graph {e.id} model={e.model} param={e.param!r} n={e.n} seed={e.seed}")


def _records(run: Run, name: str, key_suffix: str, fn, graphs, ids):
    """Per-graph JSON records, cached under ``name``."""
    cache = run.cache()
    out = []
    todo = []
    for gid in ids:
        rec = cache.get(f"{gid}__{name}{key_suffix}__{graph_fingerprint(graphs[gid])[:16]}")
        out.append(rec)
        if rec is None:
            todo.append(len(out) - 1)
    jobs = [graphs[ids[i]] for i in todo]
    if run.cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=run.cfg.workers) as pool:
            results = list(pool.map(fn, jobs))
    else:
        results = [fn(g) for g in jobs]
    for i, rec in zip(todo, results):
        out[i] = rec
        cache.put(f"{ids[i]}__{name}{key_suffix}__{graph_fingerprint(graphs[ids[i]])[:16]}", rec)
    return out


def _graphlet_record(g) -> dict:
    census = triad_census(g)
    dists = orbit_distributions(g) if g.n else []
    return {
        "census": list(census.counts),
        "phi": triad_profile(census).tolist(),
        "orbit_distributions": [{str(k): float(v) for k, v in enumerate(d) if v} for d in dists],
    }


def _portrait_record(g) -> dict:
    P = portrait(g)
    return {"n": P.n, "diameter": P.diameter, "rows": P.to_sparse_rows()}


def cmd_features(run: Run) -> None:
    """Write per-graph feature records and seed the distance cache."""
    m, graphs = run.manifest(), run.graphs()
    ids = m.ids
    cache = run.cache()
    names = {s.name for s in run.specs()} | {s.name for s in run.column_specs()}
    if names & {"dbeta", "ddelta"}:
        p = run.cfg.p
        for eps in run.cfg.eps:
            recs = _records(run, "flag", f"__p{p}__eps{_eps_label(eps)}", partial(flag_record, p=p, eps=eps),
                            graphs, ids)
            for gid, rec in zip(ids, recs):
                g = graphs[gid]
                cache.put(FeatureCache.key(gid, MetricSpec("dbeta", p, eps), g), rec["b"])
                cache.put(FeatureCache.key(gid, MetricSpec("ddelta", p), g), rec["c"])
            _write_records(run, f"flag-eps{_eps_label(eps)}.json", ids, recs, p=p, eps=_eps_label(eps))
    if names & {"triad_euclid", "triad_emd"}:
        recs = _records(run, "graphlets", "", _graphlet_record, graphs, ids)
        for gid, rec in zip(ids, recs):
            g = graphs[gid]
            cache.put(FeatureCache.key(gid, MetricSpec("triad_euclid"), g), rec["phi"])
            dense = [_dense(d) for d in rec["orbit_distributions"]]
            if dense:
                cache.put(FeatureCache.key(gid, MetricSpec("triad_emd"), g), dense)
        _write_records(run, "graphlets.json", ids, recs)
    if "pd" in names:
        recs = _records(run, "portrait", "", _portrait_record, graphs, ids)
        _write_records(run, "portrait.json", ids, recs)


def _dense(sparse: dict) -> list:
    out = [0.0] * (max(int(k) for k in sparse) + 1)
    for k, v in sparse.items():
        out[int(k)] = v
    return out


def _write_records(run: Run, name: str, ids, recs, **meta) -> None:
    doc = {"meta": meta, "graphs": [{"id": gid, **rec} for gid, rec in zip(ids, recs)]}
    path = run.path("features", name)
    atomic_write_text(path, json.dumps(doc, sort_keys=True) + "\n")
    run.log(f"wrote {os.path.relpath(path, run.out)} ({len(ids)} graphs)")


def cmd_dist(run: Run) -> None:
    """Write one distance matrix per metric, plus the random control."""
    for spec in _unique(run.specs() + run.column_specs() + [MetricSpec("random")]):
        if spec.name == "dparam":
            continue
        D = run.dist(spec)
        D.save(run.path("dist", f"{spec.label}.csv"), run.header(metric=spec.label))
        run.log(f"distance matrix {spec.label}: {D.n}x{D.n}")


def _pairs(run: Run):
    rows = _unique(run.specs() + [MetricSpec("random")])
    cols = run.column_specs()
    return rows, cols


def _table_dcor(run: Run, Dr, Dc, name, r, c) -> float:
    try:
        return dcor(Dr, Dc)
    except NegativeDcovError as exc:
        run.log(f"dCor {name} {r.label} vs {c.label}: {exc}; reported as 0")
        return dcor(Dr, Dc, on_negative="zero")


def cmd_compare(run: Run) -> None:
    """FM index and distance correlation of every row metric against every column metric."""
    rows, cols = _pairs(run)
    header = ["slice", "metric"]
    for c in cols:
        header += [f"FM-{c.label}", f"dCor-{c.label}"]
    table = []
    for name, ids in slices(run.manifest()):
        for r in rows:
            line = [name, r.label]
            Dr = slice_dist(run, r, name, ids)
            for c in cols:
                try:
                    Dc = slice_dist(run, c, name, ids)
                except MetricUnavailableError:
                    line += ["NA", "NA"]
                    continue
                line += [round(fm_compare(Dr, Dc), 12), round(_table_dcor(run, Dr, Dc, name, r, c), 12)]
            table.append(line)
    run.write_table("compare.csv", header, table)


def cmd_permtest(run: Run) -> None:
    """Permutation tests for the compare table with Bonferroni and BY corrections."""
    rows, cols = _pairs(run)
    records = []
    for name, ids in slices(run.manifest()):
        for r in rows:
            Dr = slice_dist(run, r, name, ids)
            for c in cols:
                try:
                    Dc = slice_dist(run, c, name, ids)
                except MetricUnavailableError:
                    continue
                for stat in ("fm", "dcor"):
                    res = permutation_test(Dr, Dc, stat, run.cfg.perms, run.cfg.seed, on_negative="zero")
                    records.append({"slice": name, "row": r.label, "col": c.label, "stat": stat,
                                    "value": round(res.statistic, 12), "p": res.p_value})
    p = np.array([rec["p"] for rec in records])
    bon = bonferroni(p, run.cfg.alpha) if len(p) else []
    by = benjamini_yekutieli(p, run.cfg.alpha) if len(p) else []
    for rec, b1, b2 in zip(records, bon, by):
        rec["bonferroni"] = bool(b1)
        rec["by"] = bool(b2)
    cols_out = ["slice", "row", "col", "stat", "value", "p", "bonferroni", "by"]
    run.write_table("permtest.csv", cols_out, [[rec[k] for k in cols_out] for rec in records],
                    perms=run.cfg.perms, alpha=run.cfg.alpha)
    doc = {"perms": run.cfg.perms, "alpha": run.cfg.alpha, "tests": len(records),
           "by_constant": by_constant(len(records)), "bonferroni_threshold": run.cfg.alpha / max(len(records), 1),
           "results": records}
    atomic_write_text(run.path("tables", "permtest.json"), json.dumps(doc, indent=1, sort_keys=True) + "\n")
    run.log(f"permutation tests: {len(records)} (N={run.cfg.perms}, seed {run.cfg.seed})")


def cmd_knn(run: Run) -> None:
    """Leave-one-out k-NN classification and Betti-vector regression."""
    m = run.manifest()
    k = run.cfg.knn_k
    rows = _unique(run.specs() + [MetricSpec("random")])
    target_spec = MetricSpec("dbeta", run.cfg.p, run.cfg.eps[0])
    targets = dict(zip(m.ids, compute_features([run.graphs()[i] for i in m.ids], target_spec, m.ids,
                                               run.cache(), run.cfg.workers)))
    models = {e.id: e.model for e in m}
    params = {e.id: e.param for e in m}
    cls_rows, reg_rows = [], []
    for name, ids in slices(m):
        kk = min(k, len(ids) - 1)
        for r in rows:
            D = slice_dist(run, r, name, ids)
            if kk < 1:
                cls_rows.append([name, r.label, k, "NA", "NA"])
                reg_rows.append([name, r.label, k, "NA"])
                continue
            model_rate = knn_classify_loo(D, [models[i] for i in ids], kk) if name == "all" else "NA"
            param_rate = knn_classify_loo(D, [params[i] for i in ids], kk) if name != "all" else "NA"
            mse = knn_regress_loo(D, [targets[i] for i in ids], kk)
            cls_rows.append([name, r.label, kk, model_rate, param_rate])
            reg_rows.append([name, r.label, kk, mse])
    run.write_table("knn_classify.csv", ["slice", "metric", "k", "model_rate", "param_rate"], cls_rows,
                    knn_k=k)
    run.write_table("knn_regress.csv", ["slice", "metric", "k", "mse_betti"], reg_rows, knn_k=k,
                    target=target_spec.label)


def cmd_pipeline(run: Run) -> None:
    """Run generate, features, dist, compare, permtest and knn in order."""
    cmd_generate(run)
    cmd_features(run)
    cmd_dist(run)
    cmd_compare(run)
    cmd_permtest(run)
    cmd_knn(run)


COMMANDS = {
    "generate": cmd_generate,
    "features": cmd_features,
    "dist": cmd_dist,
    "compare": cmd_compare,
    "permtest": cmd_permtest,
    "knn": cmd_knn,
    "pipeline": cmd_pipeline,
}


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON experiment config")
    common.add_argument("--out", help="output directory")
    common.add_argument("--n", type=int, help="vertices per graph")
    common.add_argument("--seed", type=int, help="global seed")
    common.add_argument("--p", type=int, help="highest homology dimension")
    common.add_argument("--eps", help="comma-separated Betti budgets; 'inf' is exact")
    common.add_argument("--metric", action="append", help="row metric(s); repeat or comma-separate")
    common.add_argument("--perms", type=int, help="permutations per test")
    common.add_argument("--alpha", type=float, help="significance level")
    common.add_argument("--knn-k", type=int, dest="knn_k", help="neighbours for k-NN")
    common.add_argument("--workers", type=int, help="worker processes for feature extraction")
    src = common.add_mutually_exclusive_group()
    src.add_argument("--point", action="store_const", const="point", dest="collection",
                     help="point-drawn collection")
    src.add_argument("--interval", action="store_const", const="interval", dest="collection",
                     help="interval-drawn collection")
    src.add_argument("--manifest", dest="collection", help="existing manifest JSON")

    parser = argparse.ArgumentParser(prog="digraphdist", description="Pseudometrics on directed graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {package_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or name).splitlines()[0].rstrip("."))
        if name in ("compare", "permtest"):
            sp.add_argument("--row", action="append", help="row metric(s)")
            sp.add_argument("--col", action="append", help="column metric(s)")
        if name == "features":
            sp.add_argument("--graphlets", action="store_true", help="also triad profiles and orbit distributions")
            sp.add_argument("--portrait", action="store_true", help="also portrait distributions")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    for key in ("out", "n", "seed", "p", "perms", "alpha", "knn_k", "workers", "collection"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if args.eps is not None:
        cfg.eps = _eps_list(args.eps)
    rows = (getattr(args, "row", None) or []) + (args.metric or [])
    if rows:
        cfg.metrics = [m for item in rows for m in _split(item)]
    if getattr(args, "col", None):
        cfg.columns = [m for item in args.col for m in _split(item)]
    if getattr(args, "graphlets", False):
        cfg.metrics = list(dict.fromkeys(cfg.metrics + ["triad_euclid", "triad_emd"]))
    if getattr(args, "portrait", False):
        cfg.metrics = list(dict.fromkeys(cfg.metrics + ["pd"]))
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        run = Run(cfg)
        COMMANDS[args.command](run)
        run.flush_log(args.command)
    except (DigraphDistError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"digraphdist: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
