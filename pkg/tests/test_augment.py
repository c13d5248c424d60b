import numpy as np
import pytest

from rankgcl.augment import (ViewSpec, drop_edge, feature_mask, make_views,
                             validate_view_specs)
from rankgcl.graphs import SbmSpec, build_graph, generate_sbm, validate


@pytest.fixture
def grid_graph():
    # a deterministic graph with exactly 1000 undirected edges
    pairs = [(i, j) for i in range(46) for j in range(i + 1, 46)][:1000]
    return build_graph(46, pairs, np.random.default_rng(0).standard_normal((46, 5)))


@pytest.fixture
def sbm():
    return generate_sbm(SbmSpec((15, 15), 0.4, 0.05, 6, 1.0, seed=2))


class TestViewSpec:
    def test_bad_kind(self):
        with pytest.raises(ValueError, match="kind"):
            ViewSpec("delete_nodes", 0.5, 1.0)

    def test_strength_range(self):
        with pytest.raises(ValueError, match="strength"):
            ViewSpec("drop_edge", 1.5, 1.0)

    def test_judgment_positive(self):
        with pytest.raises(ValueError, match="judgment"):
            ViewSpec("drop_edge", 0.5, 0.0)

    def test_strengths_must_increase(self):
        specs = [ViewSpec("drop_edge", 0.8, 1.0, 0), ViewSpec("drop_edge", 0.5, 0.7, 1)]
        with pytest.raises(ValueError, match="strengths"):
            validate_view_specs(specs)

    def test_judgments_must_decrease(self):
        specs = [ViewSpec("drop_edge", 0.5, 0.7, 0), ViewSpec("drop_edge", 0.8, 1.0, 1)]
        with pytest.raises(ValueError, match="judgments"):
            validate_view_specs(specs)

    def test_equal_judgments_rejected_by_default_allowed_on_request(self):
        specs = [ViewSpec("drop_edge", 0.5, 1.0, 0), ViewSpec("drop_edge", 0.8, 1.0, 1)]
        with pytest.raises(ValueError, match="judgments"):
            validate_view_specs(specs)
        assert validate_view_specs(specs, allow_equal_judgments=True)

    def test_mixed_kinds_rejected(self):
        specs = [ViewSpec("drop_edge", 0.5, 1.0, 0),
                 ViewSpec("feature_mask", 0.8, 0.7, 1)]
        with pytest.raises(ValueError, match="homogeneous"):
            validate_view_specs(specs)


class TestDropEdge:
    def test_zero_ratio_is_identity(self, sbm):
        out = drop_edge(sbm, 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(out.indices, sbm.indices)
        np.testing.assert_array_equal(out.indptr, sbm.indptr)

    def test_full_ratio_empties_edges(self, sbm):
        out = drop_edge(sbm, 1.0, np.random.default_rng(0))
        assert out.num_directed_edges == 0
        np.testing.assert_array_equal(out.features, sbm.features)

    def test_survivors_binomial(self, grid_graph):
        rng = np.random.default_rng(7)
        survivors = [
            drop_edge(grid_graph, 0.5, rng).num_undirected_edges for _ in range(50)
        ]
        mean, sd = 1000 * 0.5, np.sqrt(1000 * 0.25)
        assert abs(np.mean(survivors) - mean) < 3 * sd / np.sqrt(50)

    def test_never_adds_edges(self, sbm):
        rng = np.random.default_rng(1)
        original = set(map(tuple, sbm.edge_pairs()))
        for ratio in (0.2, 0.6, 0.9):
            view = drop_edge(sbm, ratio, rng)
            assert set(map(tuple, view.edge_pairs())) <= original

    def test_output_validates(self, sbm):
        rng = np.random.default_rng(3)
        assert validate(drop_edge(sbm, 0.4, rng)) is None


class TestFeatureMask:
    def test_zero_prob_is_identity(self, sbm):
        out = feature_mask(sbm, 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(out.features, sbm.features)

    def test_full_prob_zeroes_everything(self, sbm):
        out = feature_mask(sbm, 1.0, np.random.default_rng(0))
        assert not out.features.any()
        np.testing.assert_array_equal(out.indices, sbm.indices)

    def test_columns_all_or_nothing_and_binomial(self):
        d = 500
        g = build_graph(3, [(0, 1)], np.random.default_rng(0).uniform(1, 2, (3, d)))
        rng = np.random.default_rng(11)
        zero_counts = []
        for _ in range(50):
            masked = feature_mask(g, 0.5, rng).features
            col_zero = ~masked.any(axis=0)
            col_intact = np.array([
                np.array_equal(masked[:, j], g.features[:, j]) for j in range(d)
            ])
            assert np.all(col_zero | col_intact)
            zero_counts.append(col_zero.sum())
        mean, sd = d * 0.5, np.sqrt(d * 0.25)
        assert abs(np.mean(zero_counts) - mean) < 3 * sd / np.sqrt(50)


class TestMakeViews:
    def test_order_violation_rejected(self, sbm):
        specs = [ViewSpec("drop_edge", 0.8, 1.0, 0), ViewSpec("drop_edge", 0.5, 0.7, 1)]
        with pytest.raises(ValueError, match="strengths"):
            make_views(sbm, specs, np.random.default_rng(0))

    def test_single_identity_view(self, sbm):
        views = make_views(sbm, [ViewSpec("drop_edge", 0.0, 1.0, 0)],
                           np.random.default_rng(0))
        assert len(views) == 1
        np.testing.assert_array_equal(views[0].indices, sbm.indices)

    def test_milder_view_keeps_more_edges_in_expectation(self, grid_graph):
        specs = [ViewSpec("drop_edge", 0.5, 1.0, 0), ViewSpec("drop_edge", 0.8, 0.7, 1)]
        rng = np.random.default_rng(5)
        kept = np.zeros(2)
        for _ in range(30):
            views = make_views(grid_graph, specs, rng)
            kept += [v.num_undirected_edges for v in views]
        assert kept[0] > kept[1]

    def test_views_validate(self, sbm):
        specs = [ViewSpec("feature_mask", 0.3, 1.0, 0),
                 ViewSpec("feature_mask", 0.7, 0.5, 1)]
        for v in make_views(sbm, specs, np.random.default_rng(0)):
            assert validate(v) is None

    def test_deterministic_given_rng_state(self, sbm):
        specs = [ViewSpec("drop_edge", 0.5, 1.0, 0), ViewSpec("drop_edge", 0.8, 0.7, 1)]
        a = make_views(sbm, specs, np.random.default_rng(42))
        b = make_views(sbm, specs, np.random.default_rng(42))
        for va, vb in zip(a, b):
            np.testing.assert_array_equal(va.indices, vb.indices)
