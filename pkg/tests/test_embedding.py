import numpy as np
import pytest

from mapfsel.embedding import (FeatherConfig, FeatherGraphEmbedder,
                               characteristic_node_embedding, embed_graph, node_attributes,
                               pool, transition_matrix)
from mapfsel.encodings import EncodedGraph, encode_full_graph
from mapfsel.errors import ValidationError
from mapfsel.instance import MapfInstance

from conftest import dense_feather_node_matrix, grid_from_rows


def random_graph(rng, max_nodes=20, edge_prob=0.3):
    n = int(rng.integers(1, max_nodes + 1))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob]
    return EncodedGraph.from_edge_pairs(n, pairs)


class TestConfig:
    def test_default_dimension_is_500(self):
        assert FeatherConfig().dimension == 500

    def test_theta_grid_excludes_zero_includes_max(self):
        thetas = FeatherConfig(eval_points=5, theta_max=2.5).thetas()
        assert thetas[0] == pytest.approx(0.5)
        assert thetas[-1] == pytest.approx(2.5)
        assert (thetas > 0).all()

    def test_invalid_configs(self):
        with pytest.raises(ValidationError):
            FeatherConfig(order=0)
        with pytest.raises(ValidationError):
            FeatherConfig(pooling="median")
        with pytest.raises(ValidationError):
            FeatherConfig(attributes=())

    def test_fingerprint_changes_with_config(self):
        assert FeatherConfig().fingerprint() != FeatherConfig(pooling="mean").fingerprint()


class TestNodeAttributes:
    def test_isolated_node(self):
        g = EncodedGraph.from_edge_pairs(1, [])
        attrs = node_attributes(g)
        assert attrs.tolist() == [[0.0, 0.0]]

    def test_triangle(self):
        g = EncodedGraph.from_edge_pairs(3, [(0, 1), (1, 2), (0, 2)])
        attrs = node_attributes(g)
        assert np.allclose(attrs[:, 0], np.log(3.0))
        assert np.allclose(attrs[:, 1], 1.0)

    def test_star_center(self):
        g = EncodedGraph.from_edge_pairs(5, [(0, i) for i in range(1, 5)])
        attrs = node_attributes(g)
        assert attrs[0, 0] == pytest.approx(np.log(5.0))
        assert attrs[0, 1] == 0.0


class TestTransitionMatrix:
    def test_single_edge_alternates(self):
        g = EncodedGraph.from_edge_pairs(2, [(0, 1)])
        walk = transition_matrix(g).toarray()
        assert walk.tolist() == [[0.0, 1.0], [1.0, 0.0]]
        assert (walk @ walk).tolist() == [[1.0, 0.0], [0.0, 1.0]]

    def test_degree_zero_row_is_zero(self):
        g = EncodedGraph.from_edge_pairs(3, [(0, 1)])
        walk = transition_matrix(g).toarray()
        assert walk[2].tolist() == [0.0, 0.0, 0.0]
        powered = np.linalg.matrix_power(walk, 3)
        assert powered[2].tolist() == [0.0, 0.0, 0.0]

    def test_path_midpoint_row(self):
        g = EncodedGraph.from_edge_pairs(3, [(0, 1), (1, 2)])
        walk = transition_matrix(g).toarray()
        assert walk[1].tolist() == [0.5, 0.0, 0.5]


class TestCharacteristicEmbedding:
    def test_identical_attribute_pair(self):
        # Two connected nodes with the same attribute value a: every real
        # entry is cos(theta * a), every imaginary entry sin(theta * a).
        g = EncodedGraph.from_edge_pairs(2, [(0, 1)])
        config = FeatherConfig(order=3, eval_points=4, theta_max=2.0)
        emb = characteristic_node_embedding(g, config)
        attr = np.log(2.0)  # both nodes have degree 1 -> log(1 + 1)
        thetas = config.thetas()
        for a, expected_attr in enumerate((attr, 0.0)):
            for r in range(config.order):
                base = (a * config.order + r) * config.eval_points * 2
                for j, theta in enumerate(thetas):
                    assert emb[:, base + 2 * j] == pytest.approx(np.cos(theta * expected_attr))
                    assert emb[:, base + 2 * j + 1] == pytest.approx(np.sin(theta * expected_attr))

    def test_empty_graph(self):
        g = EncodedGraph.from_edge_pairs(0, [])
        assert characteristic_node_embedding(g).shape == (0, 500)
        assert embed_graph(g).values.tolist() == [0.0] * 500

    def test_matches_dense_oracle(self, rng):
        config = FeatherConfig()
        for _ in range(30):
            g = random_graph(rng, max_nodes=10)
            mine = characteristic_node_embedding(g, config)
            ref = dense_feather_node_matrix(g, config)
            assert np.abs(mine - ref).max() <= 1e-9


class TestPooling:
    def test_single_node(self):
        row = np.array([[0.3, -0.7, 1.0]])
        assert pool(row, "mean").tolist() == [0.3, -0.7, 1.0]
        assert pool(row, "max").tolist() == [0.3, -0.7, 1.0]

    def test_mean_vs_max(self):
        rows = np.array([[1.0, -1.0], [0.0, 0.0]])
        assert pool(rows, "mean").tolist() == [0.5, -0.5]
        assert pool(rows, "max").tolist() == [1.0, 0.0]

    def test_zero_node_graph(self):
        assert pool(np.zeros((0, 7)), "max").tolist() == [0.0] * 7

    def test_bad_pooling_kind(self):
        with pytest.raises(ValidationError):
            pool(np.zeros((1, 2)), "sum")


class TestEmbedGraph:
    def test_output_length_500(self, rng):
        g = random_graph(rng)
        assert embed_graph(g).values.shape == (500,)

    def test_matches_pooled_node_matrix(self, rng):
        for pooling in ("mean", "max"):
            config = FeatherConfig(pooling=pooling)
            g = random_graph(rng)
            emb = embed_graph(g, config).values
            ref = pool(characteristic_node_embedding(g, config), pooling)
            assert np.array_equal(emb, ref)

    def test_isomorphism_invariance(self, rng):
        config = FeatherConfig()
        for _ in range(30):
            g = random_graph(rng, max_nodes=30)
            perm = rng.permutation(g.num_nodes)
            permuted = EncodedGraph.from_edge_pairs(
                g.num_nodes, [(int(perm[u]), int(perm[v])) for u, v in g.edges])
            d = np.abs(embed_graph(g, config).values - embed_graph(permuted, config).values)
            assert d.max() <= 1e-12

    def test_bounded_entries(self, rng):
        for _ in range(20):
            g = random_graph(rng, max_nodes=25)
            values = embed_graph(g).values
            assert np.abs(values).max() <= 1.0 + 1e-9

    def test_deterministic_bytes(self, rng):
        g = random_graph(rng)
        a = embed_graph(g).values
        b = embed_graph(g).values
        assert a.tobytes() == b.tobytes()

    def test_same_grid_different_agents_differ(self):
        # Max-pooled full-graph embeddings must separate instances that share
        # a grid but have different agent sets.
        grid = grid_from_rows(["....", "....", "....", "...."])
        a = MapfInstance(grid=grid, sources=(0,), targets=(15,))
        b = MapfInstance(grid=grid, sources=(3,), targets=(12,))
        ea = embed_graph(encode_full_graph(a)).values
        eb = embed_graph(encode_full_graph(b)).values
        assert np.abs(ea - eb).max() > 0.0


class TestMemoryCeiling:
    def test_large_grid_embedding_stays_sparse(self):
        # On a 256x256 open grid (65,536 nodes) the embed path must never
        # materialize anything close to an n x n dense matrix (34 GB) or
        # even the full n x 500 node-embedding matrix (262 MB).
        import tracemalloc

        from mapfsel.benchmark import GridMap
        from mapfsel.instance import MapfInstance

        rng = np.random.default_rng(0)
        grid = GridMap.from_passable(np.ones((256, 256), dtype=bool))
        ids = rng.choice(np.arange(256 * 256), size=120, replace=False)
        inst = MapfInstance(grid=grid, sources=tuple(int(i) for i in ids[:60]),
                            targets=tuple(int(i) for i in ids[60:]))
        graph = encode_full_graph(inst)
        tracemalloc.start()
        values = embed_graph(graph).values
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert values.shape == (500,)
        assert peak < 200 * 1024 * 1024


class TestEmbedderEstimator:
    def test_transform_shape_and_params(self, rng):
        graphs = [random_graph(rng) for _ in range(3)]
        emb = FeatherGraphEmbedder()
        out = emb.fit(graphs).transform(graphs)
        assert out.shape == (3, 500)
        params = emb.get_params()
        assert params["pooling"] == "max"
        assert params["order"] == 5

    def test_empty_input(self):
        assert FeatherGraphEmbedder().transform([]).shape == (0, 500)

    def test_set_params_roundtrip(self):
        emb = FeatherGraphEmbedder().set_params(pooling="mean", order=2)
        assert emb._config().dimension == 200
