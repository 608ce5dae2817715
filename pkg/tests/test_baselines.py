import numpy as np
import pytest

from paperrank import BaselineSpec, ComputationError, ConfigError, Dataset, Paper, rank_baseline
from conftest import SIMPLE_SCALE, make_review


def dataset_from_scores(per_paper: dict, confidences: dict | None = None):
    papers = {p: Paper(paper_id=p, track="main") for p in per_paper}
    reviews = {}
    for pid, scores in per_paper.items():
        for i, s in enumerate(scores):
            conf = (confidences or {}).get(pid, [None] * len(scores))[i]
            rid = f"{pid}_r{i}"
            reviews[rid] = make_review(rid, pid, f"{pid}_e{i}", s, confidence=conf)
    return Dataset(papers=papers, reviews=reviews, scale=SIMPLE_SCALE)


class TestMeanWeighted:
    def test_confidence_weighted_mean(self):
        d = dataset_from_scores({"a": [2, 4]}, {"a": [1.0, 3.0]})
        result = rank_baseline(d, BaselineSpec("mean-s-w"))
        assert result.utilities["a"] == pytest.approx(3.5)

    def test_missing_confidence_default_weight(self):
        d = dataset_from_scores({"a": [2, 4]})
        result = rank_baseline(d, BaselineSpec("mean-s-w"))
        assert result.utilities["a"] == pytest.approx(3.0)

    def test_equal_confidences_match_plain_mean(self):
        rng = np.random.default_rng(0)
        scores = {f"p{i}": rng.integers(1, 7, size=3).tolist() for i in range(10)}
        conf = {p: [2.0, 2.0, 2.0] for p in scores}
        weighted = rank_baseline(dataset_from_scores(scores, conf), BaselineSpec("mean-s-w"))
        for p, vals in scores.items():
            assert weighted.utilities[p] == pytest.approx(np.mean(vals))

    def test_nonpositive_weight_total(self):
        d = dataset_from_scores({"a": [2, 4]}, {"a": [0.0, 0.0]})
        with pytest.raises(ComputationError, match="a"):
            rank_baseline(d, BaselineSpec("mean-s-w"))


class TestMedian:
    def test_odd_count(self):
        d = dataset_from_scores({"a": [2, 5, 3]})
        assert rank_baseline(d, BaselineSpec("median-s")).utilities["a"] == 3.0

    def test_even_count_mean_of_middle(self):
        d = dataset_from_scores({"a": [2, 3, 5, 6]})
        assert rank_baseline(d, BaselineSpec("median-s")).utilities["a"] == 4.0


class TestMajority:
    def test_mode(self):
        d = dataset_from_scores({"a": [2, 2, 5]})
        assert rank_baseline(d, BaselineSpec("major-s")).utilities["a"] == 2.0

    def test_tied_modes_fall_back_to_mean(self):
        d = dataset_from_scores({"a": [2, 5]})
        assert rank_baseline(d, BaselineSpec("major-s")).utilities["a"] == pytest.approx(3.5)


class TestInvariances:
    @pytest.mark.parametrize("method", ["mean-s-w", "median-s", "major-s"])
    def test_review_order_invariance(self, method, synth_small):
        dataset, _ = synth_small
        r1 = rank_baseline(dataset, BaselineSpec(method))
        reviews = dict(reversed(list(dataset.reviews.items())))
        shuffled = Dataset(papers=dataset.papers, reviews=reviews, scale=dataset.scale)
        r2 = rank_baseline(shuffled, BaselineSpec(method))
        assert r1.utilities == r2.utilities
        assert r1.ordering() == r2.ordering()

    @pytest.mark.parametrize("method", ["mean-s-w", "median-s", "major-s"])
    def test_shift_invariance_of_ranking(self, method):
        rng = np.random.default_rng(1)
        scores = {f"p{i}": rng.integers(1, 5, size=3).tolist() for i in range(8)}
        base = rank_baseline(dataset_from_scores(scores), BaselineSpec(method))
        shifted_scores = {p: [s + 1 for s in v] for p, v in scores.items()}
        shifted = rank_baseline(dataset_from_scores(shifted_scores), BaselineSpec(method))
        assert base.ordering() == shifted.ordering()


def test_ranks_are_permutation():
    rng = np.random.default_rng(2)
    scores = {f"p{i}": rng.integers(1, 7, size=2).tolist() for i in range(12)}
    result = rank_baseline(dataset_from_scores(scores), BaselineSpec("median-s"))
    assert sorted(result.ranks.values()) == list(range(1, 13))
    ordering = result.ordering()
    utils = [result.utilities[p] for p in ordering]
    assert utils == sorted(utils, reverse=True)


def test_unknown_method():
    with pytest.raises(ConfigError):
        BaselineSpec("zscore")
