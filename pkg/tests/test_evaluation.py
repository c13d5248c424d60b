import numpy as np
import pytest
from sklearn.metrics import f1_score, recall_score, roc_auc_score

from rankgcl.evaluation import (MetricsReport, Split, compute_metrics,
                                linear_probe, make_split,
                                similarity_diagnostics, write_metrics_csv)
from rankgcl.encoders import init_gat_params
from rankgcl.graphs import SbmSpec, generate_sbm


class TestSplit:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            Split([0, 1], [1], [2])

    def test_empty_train_rejected(self):
        with pytest.raises(ValueError, match="train"):
            Split([], [0], [1])

    def test_exhaustive_split_has_empty_test(self):
        labels = np.repeat([0, 1], 50)
        split = make_split(labels, 20, 30, seed=0)
        assert split.train.size == 40
        assert split.val.size == 60
        assert split.test.size == 0

    def test_balanced_remainder(self):
        labels = np.repeat([0, 1], 100)
        split = make_split(labels, 20, 30, seed=1)
        assert split.test.size == 100
        test_labels = labels[split.test]
        assert (test_labels == 0).sum() == 50
        assert (test_labels == 1).sum() == 50

    def test_class_too_small_rejected(self):
        labels = np.array([0] * 10 + [1] * 100)
        with pytest.raises(ValueError, match="class 0"):
            make_split(labels, 20, 30, seed=0)

    def test_train_membership_frequency(self):
        labels = np.repeat([0, 1], 100)
        counts = np.zeros(200)
        trials = 100
        for seed in range(trials):
            split = make_split(labels, 20, 30, seed=seed)
            counts[split.train] += 1
        p = 20 / 100
        sigma = np.sqrt(trials * p * (1 - p))
        assert np.all(np.abs(counts - trials * p) < 5 * sigma)
        assert abs(counts.mean() - trials * p) < 3 * sigma / np.sqrt(200)


class TestLinearProbe:
    def test_linearly_separable_reaches_perfect_accuracy(self):
        rng = np.random.default_rng(0)
        z = np.concatenate([rng.normal(-4, 0.2, (100, 3)), rng.normal(4, 0.2, (100, 3))])
        labels = np.repeat([0, 1], 100)
        split = make_split(labels, 20, 30, seed=0)
        report = linear_probe(z, labels, split, seed=0)
        assert report.accuracy == 1.0

    def test_permuted_labels_hit_chance_floor(self):
        rng = np.random.default_rng(1)
        z = rng.standard_normal((300, 8))
        accs = []
        for seed in range(10):
            labels = np.random.default_rng(seed).permutation(np.repeat([0, 1, 2], 100))
            split = make_split(labels, 20, 30, seed=seed)
            accs.append(linear_probe(z, labels, split, seed=seed).accuracy)
        n_test = 150
        sigma = np.sqrt((1 / 3) * (2 / 3) / n_test)
        assert abs(np.mean(accs) - 1 / 3) < 3 * sigma / np.sqrt(10) + 0.05

    def test_single_class_train_rejected(self):
        z = np.random.default_rng(2).standard_normal((100, 4))
        labels = np.zeros(100, dtype=int)
        labels[:2] = 1
        split = Split(np.arange(10, 30), np.arange(30, 40), np.arange(40, 100))
        with pytest.raises(ValueError, match="single class"):
            linear_probe(z, labels, split)


class TestMetrics:
    def test_auc_extremes_on_binary_problem(self):
        y = np.array([0, 0, 1, 1])
        perfect = np.array([[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]])
        reversed_scores = perfect[::-1]
        assert compute_metrics(perfect, y).macro_auc == 1.0
        assert compute_metrics(reversed_scores, y).macro_auc == 0.0

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(3)
        y = rng.integers(0, 3, 200)
        probs = rng.dirichlet(np.ones(3), 200)
        base = compute_metrics(probs, y)
        swapped = compute_metrics(probs[:, [2, 1, 0]], np.array([2, 1, 0])[y])
        assert base.accuracy == pytest.approx(swapped.accuracy, abs=1e-12)
        assert base.macro_f1 == pytest.approx(swapped.macro_f1, abs=1e-12)
        assert base.macro_auc == pytest.approx(swapped.macro_auc, abs=1e-12)
        assert base.macro_recall == pytest.approx(swapped.macro_recall, abs=1e-12)

    def test_matches_sklearn(self):
        rng = np.random.default_rng(4)
        for trial in range(5):
            y = rng.integers(0, 4, 300)
            probs = rng.dirichlet(np.ones(4), 300)
            report = compute_metrics(probs, y)
            pred = probs.argmax(axis=1)
            assert report.macro_f1 == pytest.approx(
                f1_score(y, pred, average="macro", labels=np.unique(y)), abs=1e-12)
            assert report.macro_recall == pytest.approx(
                recall_score(y, pred, average="macro", labels=np.unique(y)), abs=1e-12)
            assert report.macro_auc == pytest.approx(
                roc_auc_score(y, probs, multi_class="ovr", average="macro"), abs=1e-12)

    def test_all_metrics_in_unit_interval(self):
        rng = np.random.default_rng(5)
        y = rng.integers(0, 3, 50)
        probs = rng.dirichlet(np.ones(3), 50)
        report = compute_metrics(probs, y)
        for value in (report.accuracy, report.macro_f1, report.macro_auc,
                      report.macro_recall):
            assert 0.0 <= value <= 1.0


class TestDiagnostics:
    @pytest.fixture
    def setup(self):
        g = generate_sbm(SbmSpec((10, 10), 0.4, 0.05, 6, 1.0, seed=0))
        params = init_gat_params(6, np.random.default_rng(0), num_layers=2,
                                 heads=2, hidden_units=4, out_dim=4)
        return g, params

    def test_zero_ratio_reports_exactly_one(self, setup):
        g, params = setup
        rows = similarity_diagnostics(g, params, [0.0], num_seeds=3, seed=0)
        assert rows[0][1] == 1.0

    def test_full_ratio_changes_output(self, setup):
        g, params = setup
        rows = similarity_diagnostics(g, params, [1.0], num_seeds=1, seed=0)
        assert rows[0][1] < 1.0

    def test_row_structure(self, setup):
        g, params = setup
        rows = similarity_diagnostics(g, params, [0.2, 0.6], num_seeds=2, seed=1)
        assert [r[0] for r in rows] == [0.2, 0.6]
        for _, inter, intra in rows:
            assert -1.0 <= inter <= 1.0 and -1.0 <= intra <= 1.0

    def test_bad_ratio_rejected(self, setup):
        g, params = setup
        with pytest.raises(ValueError, match="ratio"):
            similarity_diagnostics(g, params, [1.5])


class TestMetricsCsv:
    def test_fixed_format(self, tmp_path):
        path = tmp_path / "metrics.csv"
        report = MetricsReport(0.5, 1 / 3, 0.25, 1.0)
        write_metrics_csv(path, [("run1", 7, report)])
        lines = path.read_text().splitlines()
        assert lines[0] == "run_id,seed,accuracy,f1,auc,recall"
        assert lines[1] == "run1,7,0.500000,0.333333,0.250000,1.000000"
