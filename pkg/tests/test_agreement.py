import pytest

from paperrank import Dataset, Paper, dataset_alpha, krippendorff_alpha_ordinal
from conftest import SIMPLE_SCALE, make_review


def test_perfect_agreement_is_one():
    assert krippendorff_alpha_ordinal([[2, 2], [3, 3], [5, 5, 5]]) == pytest.approx(1.0)


def test_hand_computed_three_items():
    # items [1,2], [2,2,3], [3,3]; coincidence marginals n=(1,3,3);
    # ordinal deltas d2(1,2)=4, d2(2,3)=9, d2(1,3)=25;
    # D_o = 26/7, D_e = 336/42 = 8  ->  alpha = 1 - (26/7)/8 = 15/28
    alpha = krippendorff_alpha_ordinal([[1, 2], [2, 2, 3], [3, 3]])
    assert alpha == pytest.approx(15 / 28, abs=1e-12)


def test_two_paper_dataset_matches_hand_computation():
    # p1: A=1 B=2; p2: A=2 B=2 -> D_o = D_e = 2 -> alpha = 0
    papers = {p: Paper(paper_id=p, track="main") for p in ("p1", "p2")}
    reviews = {
        "r1": make_review("r1", "p1", "A", 1),
        "r2": make_review("r2", "p1", "B", 2),
        "r3": make_review("r3", "p2", "A", 2),
        "r4": make_review("r4", "p2", "B", 2),
    }
    d = Dataset(papers=papers, reviews=reviews, scale=SIMPLE_SCALE)
    assert dataset_alpha(d) == pytest.approx(0.0, abs=1e-12)


def test_single_review_items_carry_no_information():
    assert krippendorff_alpha_ordinal([[3], [4], [5]]) is None


def test_identical_values_everywhere_undefined():
    assert krippendorff_alpha_ordinal([[2, 2], [2, 2]]) is None


def test_more_disagreement_lowers_alpha():
    mild = krippendorff_alpha_ordinal([[1, 2], [3, 3], [5, 5]])
    wild = krippendorff_alpha_ordinal([[1, 5], [3, 1], [5, 2]])
    assert wild < mild
