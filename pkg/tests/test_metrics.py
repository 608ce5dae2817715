import numpy as np
import pytest

from paperrank import auroc, prauc, spearman
from oracles import auroc_oracle, prauc_oracle, spearman_oracle


def random_instance(rng, n, tie_heavy=False):
    labels = rng.random(n) < rng.uniform(0.2, 0.8)
    if not labels.any() or labels.all():
        labels[0] = True
        labels[1] = False
    if tie_heavy:
        scores = rng.integers(0, 4, size=n).astype(float)
    else:
        scores = rng.standard_normal(n)
    return labels.tolist(), scores.tolist()


class TestAuroc:
    def test_perfect_separator(self):
        labels = [True, True, False, False]
        assert auroc(labels, [1.0, 1.0, 0.0, 0.0]) == 1.0

    def test_ties_half_credit(self):
        assert auroc([True, False], [1.0, 1.0]) == 0.5

    def test_single_class_absent(self):
        assert auroc([True, True], [1.0, 2.0]) is None

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_pairwise_oracle(self, seed):
        rng = np.random.default_rng(seed)
        labels, scores = random_instance(rng, int(rng.integers(3, 51)), tie_heavy=seed % 2 == 0)
        assert auroc(labels, scores) == pytest.approx(auroc_oracle(labels, scores), abs=1e-12)


class TestPrauc:
    def test_perfect_separator(self):
        assert prauc([True, False, False], [3.0, 2.0, 1.0]) == 1.0

    def test_single_class_absent(self):
        assert prauc([False, False], [1.0, 2.0]) is None

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_definition_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        labels, scores = random_instance(rng, int(rng.integers(3, 51)), tie_heavy=seed % 2 == 0)
        assert prauc(labels, scores) == pytest.approx(prauc_oracle(labels, scores), abs=1e-12)


class TestSpearman:
    def test_identical_ranking(self):
        assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)

    def test_reversed_ranking(self):
        assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_constant_input_undefined(self):
        assert spearman([1, 1, 1], [1, 2, 3]) is None

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_rank_oracle(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(3, 51))
        x = rng.integers(0, 6, size=n).astype(float).tolist()
        y = (rng.integers(0, 6, size=n) + rng.standard_normal(n) * (seed % 2)).tolist()
        expected = spearman_oracle(x, y)
        got = spearman(x, y)
        if expected is None:
            assert got is None
        else:
            assert got == pytest.approx(expected, abs=1e-12)


def test_metric_ranges_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        labels, scores = random_instance(rng, 20)
        a = auroc(labels, scores)
        p = prauc(labels, scores)
        assert 0.0 <= a <= 1.0
        assert 0.0 <= p <= 1.0
        s = spearman(scores, rng.standard_normal(20))
        assert -1.0 <= s <= 1.0


def test_agreement_with_sklearn_and_scipy():
    """Third opinion next to the brute-force oracles."""
    from scipy.stats import spearmanr
    from sklearn.metrics import average_precision_score, roc_auc_score

    rng = np.random.default_rng(42)
    for _ in range(20):
        labels, scores = random_instance(rng, 40, tie_heavy=True)
        assert auroc(labels, scores) == pytest.approx(roc_auc_score(labels, scores), abs=1e-12)
        assert prauc(labels, scores) == pytest.approx(
            average_precision_score(labels, scores), abs=1e-12
        )
        other = rng.standard_normal(40)
        assert spearman(scores, other) == pytest.approx(
            spearmanr(scores, other).statistic, abs=1e-12
        )
