import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from digraphdist import (
    CollectionManifest,
    ModelParams,
    degrees,
    gen_er,
    gen_gr,
    gen_interval_collection,
    gen_pa,
    gen_point_collection,
)
from digraphdist.exceptions import BadConfigError, BadParamError
from digraphdist.random_models import INTERVAL_GRID, derive_seed, materialize, scaled_interval_grid
from digraphdist.digraph import read_edge_list

from helpers import bigon, complete


class TestER:
    def test_empty(self):
        assert gen_er(5, 0.0, 3).num_edges == 0

    def test_complete(self):
        assert gen_er(5, 1.0, 3) == complete(5)

    @pytest.mark.parametrize("rho", [-0.1, 1.5])
    def test_bad_rho(self, rho):
        with pytest.raises(BadParamError):
            gen_er(5, rho, 0)

    def test_edge_count_mean(self):
        counts = [gen_er(500, 0.1, s).num_edges for s in range(200)]
        mean = 500 * 499 * 0.1
        sigma = math.sqrt(500 * 499 * 0.1 * 0.9)
        # the mean of 200 draws has standard error sigma / sqrt(200)
        assert abs(np.mean(counts) - mean) < 3 * sigma / math.sqrt(200)
        assert abs(np.std(counts) - sigma) < 0.25 * sigma

    def test_directions_independent(self):
        g = gen_er(300, 0.3, 1)
        A = g.adjacency_matrix()
        iu = np.triu_indices(300, 1)
        both = (A[iu] & A.T[iu]).mean()
        assert abs(both - 0.09) < 0.01


class TestGR:
    def test_empty(self):
        assert gen_gr(20, 0.0, 1).num_edges == 0

    def test_full_radius(self):
        g = gen_gr(15, math.sqrt(2), 1)
        A = g.adjacency_matrix()
        assert g.num_edges == 15 * 14 // 2
        assert not (A & A.T).any()

    def test_bad_radius(self):
        with pytest.raises(BadParamError):
            gen_gr(5, -1.0, 0)

    def test_orientation_bias(self):
        up = total = 0
        for s in range(200):
            e = gen_gr(200, 0.2, s).edges
            up += int((e[:, 0] < e[:, 1]).sum())
            total += len(e)
        frac = up / total
        sigma = math.sqrt((1 / 3) * (2 / 3) / total)
        assert abs(frac - 1 / 3) < 3 * sigma

    @given(st.integers(0, 30), st.floats(0, 1.5), st.integers(0, 2**32))
    def test_no_bigons(self, n, r, seed):
        A = gen_gr(n, r, seed).adjacency_matrix()
        assert not (A & A.T).any()


class TestPA:
    def test_forced_bigon(self):
        assert gen_pa(2, 1, 0) == bigon()

    @pytest.mark.parametrize("n,k", [(1, 1), (5, 0), (5, 5), (5, 2.5)])
    def test_bad_k(self, n, k):
        with pytest.raises(BadParamError):
            gen_pa(n, k, 0)

    @given(st.integers(2, 40), st.data(), st.integers(0, 2**32))
    def test_out_degrees(self, n, data, seed):
        k = data.draw(st.integers(1, n - 1))
        g, multi = gen_pa(n, k, seed, return_multigraph=True)
        pre = np.bincount(multi[:, 0], minlength=n)
        assert (pre == k).all()
        assert (multi[:, 0] != multi[:, 1]).all()
        out, _ = degrees(g)
        assert (out <= k).all()
        assert {tuple(e) for e in multi} == set(g.edge_list())

    @pytest.mark.slow
    def test_heavy_tail(self):
        hits = 0
        for s in range(100):
            _, inn = degrees(gen_pa(500, 20, s))
            hits += inn.max() > 3 * inn.mean()
        assert hits >= 90


@pytest.mark.parametrize("gen,param", [(gen_er, 0.2), (gen_gr, 0.3), (gen_pa, 3)])
def test_deterministic(gen, param):
    assert gen(40, param, 99) == gen(40, param, 99)
    assert gen(40, param, 99) != gen(40, param, 100)


class TestModelParams:
    @pytest.mark.parametrize("model,param,n", [("ER", 1.2, 10), ("GR", 2.0, 10), ("PA", 10, 10),
                                               ("PA", 2.5, 10), ("XX", 1, 10)])
    def test_invalid(self, model, param, n):
        with pytest.raises(BadParamError):
            ModelParams(model, param, n)

    def test_valid(self):
        ModelParams("GR", math.sqrt(2), 10)
        ModelParams("PA", 9, 10)


class TestCollections:
    def test_point_counts(self):
        m = gen_point_collection(7)
        models = [e.model for e in m]
        assert len(m) == 120
        assert (models.count("ER"), models.count("GR"), models.count("PA")) == (60, 30, 30)
        assert all(e.n == 500 for e in m)

    def test_interval_counts(self):
        m = gen_interval_collection(7)
        assert len(m) == 300
        assert all([e.model for e in m].count(x) == 100 for x in ("ER", "GR", "PA"))

    def test_interval_er_ranges(self):
        m = gen_interval_collection(3)
        for e in m:
            if e.model == "ER":
                assert any(lo < e.param < hi for lo, hi in INTERVAL_GRID["ER"])
            if e.model == "PA":
                assert any(lo <= e.param <= hi for lo, hi in INTERVAL_GRID["PA"])
                assert float(e.param).is_integer()

    def test_interval_order(self):
        m = gen_interval_collection(0)
        assert m.ids[:2] == ["ER-i0-00", "ER-i0-01"]
        assert m.ids[100] == "GR-i0-00"

    def test_seed_stability(self):
        a, b = gen_interval_collection(5), gen_interval_collection(5)
        assert a.to_json() == b.to_json()
        assert gen_interval_collection(6).to_json() != a.to_json()

    def test_per_graph_seed_independent_of_order(self):
        m = gen_point_collection(11, n=20, grid={"ER": (0.1,)}, per_param=3)
        for e in m:
            assert e.seed == derive_seed(11, e.id)
        reordered = CollectionManifest(list(reversed(m.entries)))
        gens = m.generate()
        for e in reordered:
            assert e.generate() == gens[e.id]

    def test_grid_override(self):
        m = gen_point_collection(0, n=50, grid={"PA": (10,)}, per_param=2)
        assert [e.id for e in m] == ["PA-10-00", "PA-10-01"]

    def test_bad_grid(self):
        with pytest.raises(BadConfigError):
            gen_point_collection(0, grid={"SBM": (1,)})
        with pytest.raises(BadParamError):
            gen_point_collection(0, n=10, grid={"PA": (20,)})

    def test_json_roundtrip(self, tmp_path):
        m = gen_interval_collection(1, n=30, per_interval=2)
        path = tmp_path / "manifest.json"
        m.save(path)
        back = CollectionManifest.load(path)
        assert back.entries == m.entries and back.kind == "interval"
        bare = json.dumps([{"id": e.id, "model": e.model, "param": e.param, "n": e.n, "seed": e.seed}
                           for e in m])
        assert CollectionManifest.from_json(bare).entries == m.entries

    def test_malformed_manifest(self):
        with pytest.raises(BadConfigError):
            CollectionManifest.from_json('{"entries": [{"id": "a"}]}')
        with pytest.raises(BadConfigError):
            CollectionManifest.from_json('[{"id": "a", "model": "ER", "param": 0.1, "n": 5, "seed": 1},'
                                         ' {"id": "a", "model": "ER", "param": 0.1, "n": 5, "seed": 2}]')

    def test_materialize(self, tmp_path):
        m = gen_point_collection(2, n=12, grid={"GR": (0.3,)}, per_param=2)
        paths = materialize(m, tmp_path)
        for e in m:
            assert read_edge_list(paths[e.id]) == e.generate()

    def test_scaled_grid(self):
        g = scaled_interval_grid(100)
        assert g["ER"][0] == (0.0, 0.05)
        assert g["PA"] == INTERVAL_GRID["PA"]
        assert scaled_interval_grid(100, er_factor=3.0)["ER"][3] == (0.27, 0.3)
