import csv
import json
import os

import pytest

from digraphdist import CollectionManifest, DistanceMatrix, gen_point_collection
from digraphdist.cli import ExperimentConfig, main
from digraphdist.digraph import read_edge_list

SMALL = ["--n", "12", "--p", "3", "--perms", "49"]


def read_table(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture
def manifest(tmp_path):
    m = gen_point_collection(2, n=12, grid={"ER": (0.2, 0.45), "GR": (0.4,), "PA": (2, 3)}, per_param=3)
    path = tmp_path / "m.json"
    m.save(path)
    return str(path)


class TestGenerate:
    def test_point_collection(self, tmp_path):
        out = tmp_path / "r"
        assert main(["generate", "--point", "--n", "100", "--seed", "7", "--out", str(out)]) == 0
        m = CollectionManifest.load(out / "manifest.json")
        assert len(m) == 120
        assert {e.model for e in m} == {"ER", "GR", "PA"}
        assert len(os.listdir(out / "graphs")) == 120
        g = read_edge_list(out / "graphs" / f"{m.ids[0]}.edges")
        assert g == m.entries[0].generate()
        assert "config_digest" in (out / "run.log").read_text()

    def test_seed_changes_output(self, tmp_path):
        assert main(["generate", "--interval", "--n", "40", "--seed", "1", "--out", str(tmp_path / "a")]) == 0
        assert main(["generate", "--interval", "--n", "40", "--seed", "2", "--out", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "manifest.json").read_text()
        b = (tmp_path / "b" / "manifest.json").read_text()
        assert a != b


class TestPipeline:
    def test_outputs(self, tmp_path, manifest):
        out = tmp_path / "r"
        assert main(["pipeline", "--manifest", manifest, *SMALL, "--out", str(out)]) == 0
        tables = set(os.listdir(out / "tables"))
        assert {"compare.csv", "permtest.csv", "permtest.json", "knn_classify.csv", "knn_regress.csv"} <= tables
        for label in ("dbeta", "ddelta", "triad_euclid", "triad_emd", "pd", "random"):
            D = DistanceMatrix.load(out / "dist" / f"{label}.csv")
            assert D.n == 15
        compare = read_table(out / "tables" / "compare.csv")
        assert {r["slice"] for r in compare} == {"all", "ER", "GR", "PA"}
        doc = json.loads((out / "tables" / "permtest.json").read_text())
        assert doc["tests"] == len(doc["results"]) > 0
        assert all(1 / 50 <= r["p"] <= 1 for r in doc["results"])

    def test_workers_do_not_change_outputs(self, tmp_path, manifest):
        outs = []
        for w in ("1", "2"):
            out = tmp_path / f"w{w}"
            assert main(["pipeline", "--manifest", manifest, *SMALL, "--workers", w, "--out", str(out)]) == 0
            outs.append(out)
        for sub in ("tables", "dist", "features"):
            for name in sorted(os.listdir(outs[0] / sub)):
                assert (outs[0] / sub / name).read_bytes() == (outs[1] / sub / name).read_bytes(), name

    def test_rerun_uses_cache(self, tmp_path, manifest):
        out = str(tmp_path / "r")
        args = ["compare", "--manifest", manifest, *SMALL, "--out", out]
        assert main(args) == 0
        first = (tmp_path / "r" / "tables" / "compare.csv").read_bytes()
        assert os.listdir(tmp_path / "r" / "cache")
        assert main(args) == 0
        assert (tmp_path / "r" / "tables" / "compare.csv").read_bytes() == first

    def test_single_graph(self, tmp_path):
        m = gen_point_collection(0, n=10, grid={"ER": (0.3,)}, per_param=1)
        m.save(tmp_path / "one.json")
        out = tmp_path / "r"
        assert main(["compare", "--manifest", str(tmp_path / "one.json"), *SMALL, "--out", str(out)]) == 0
        rows = read_table(out / "tables" / "compare.csv")
        for r in rows:
            assert float(r["FM-dbeta"]) == 1.0 and float(r["dCor-dbeta"]) == 0.0

    def test_features_flags(self, tmp_path, manifest):
        out = tmp_path / "r"
        assert main(["features", "--manifest", manifest, *SMALL, "--metric", "dbeta",
                     "--graphlets", "--portrait", "--out", str(out)]) == 0
        names = set(os.listdir(out / "features"))
        assert {"flag-epsinf.json", "graphlets.json", "portrait.json"} <= names
        doc = json.loads((out / "features" / "graphlets.json").read_text())
        assert len(doc["graphs"]) == 15 and len(doc["graphs"][0]["census"]) == 13

    def test_eps_list(self, tmp_path, manifest):
        out = tmp_path / "r"
        assert main(["dist", "--manifest", manifest, *SMALL, "--eps", "10,inf", "--out", str(out)]) == 0
        assert {"dbeta-eps10.csv", "dbeta.csv"} <= set(os.listdir(out / "dist"))


class TestErrors:
    def run_err(self, capsys, argv):
        assert main(argv) == 2
        err = capsys.readouterr().err.strip()
        assert err.startswith("digraphdist: error:") and "\n" not in err
        return err

    def test_bad_metric(self, tmp_path, capsys):
        err = self.run_err(capsys, ["dist", "--metric", "hamming", "--out", str(tmp_path)])
        assert "BadConfig" in err

    def test_missing_manifest(self, tmp_path, capsys):
        self.run_err(capsys, ["dist", "--manifest", str(tmp_path / "nope.json"), "--out", str(tmp_path)])

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("n: 10\nbogus: 1\n")
        err = self.run_err(capsys, ["generate", "--config", str(cfg), "--out", str(tmp_path)])
        assert "bogus" in err

    def test_bad_values(self, tmp_path, capsys):
        self.run_err(capsys, ["generate", "--perms", "0", "--out", str(tmp_path)])
        self.run_err(capsys, ["generate", "--workers", "0", "--out", str(tmp_path)])

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


class TestConfig:
    def test_yaml(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("collection: interval\nn: 40\nseed: 3\neps: [10, inf]\nmetrics: dbeta,pd\n"
                       "grid:\n  PA: [10, 20]\n")
        c = ExperimentConfig.load(cfg)
        assert c.collection == "interval" and c.n == 40 and c.eps == [10.0, None]
        assert c.metrics == ["dbeta", "pd"] and c.grid == {"PA": [10, 20]}

    def test_digest_ignores_workers(self):
        a, b = ExperimentConfig(workers=1), ExperimentConfig(workers=4, out="elsewhere")
        assert a.digest() == b.digest()
        assert a.digest() != ExperimentConfig(seed=1).digest()

    def test_cli_overrides_config(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("n: 10\nseed: 1\ncollection: point\nper_param: 1\ngrid:\n  PA: [2]\n")
        out = tmp_path / "r"
        assert main(["generate", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == 0
        m = CollectionManifest.load(out / "manifest.json")
        assert m.seed == 5 and all(e.n == 10 for e in m)
