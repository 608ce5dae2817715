import numpy as np
import pytest

from paperrank import (
    ACCEPT_OPT,
    CITE_OPT,
    SCORE_ONLY,
    ComputationError,
    ConfigError,
    CoverageError,
    Dataset,
    FeatureAssembler,
    FeatureConfig,
    Paper,
    SchemaError,
    TextFeatureTable,
    assemble,
    feature_matrix,
    read_text_features,
    relatedness_feature,
    score_features,
    synthetic_text_features,
    validate_text_features,
    write_text_features,
)
from paperrank.features import score_concat_features, score_stat_features, text_feature_columns
from conftest import SIMPLE_SCALE, make_review
from oracles import stats_oracle


def two_paper_dataset(scores_a=(2, 4), scores_b=(3, 5)):
    papers = {p: Paper(paper_id=p, track="main") for p in ("a", "b")}
    reviews = {}
    for i, s in enumerate(scores_a):
        reviews[f"ra{i}"] = make_review(f"ra{i}", "a", f"E{i}", s, aspects={"clarity": 2, "rigor": 4})
    for i, s in enumerate(scores_b):
        reviews[f"rb{i}"] = make_review(f"rb{i}", "b", f"F{i}", s, aspects={"clarity": 3, "rigor": 3})
    return Dataset(papers=papers, reviews=reviews, scale=SIMPLE_SCALE)


class TestScoreFeatures:
    def test_mean_sd_min_max(self):
        d = two_paper_dataset(scores_a=(2, 4))
        stats = score_stat_features(d, "a")
        # overall block first: mean 3, population sd 1, min 2, max 4
        assert stats[:4] == pytest.approx([3.0, 1.0, 2.0, 4.0])

    def test_single_review_degenerate(self):
        papers = {"a": Paper(paper_id="a", track="main")}
        reviews = {"r1": make_review("r1", "a", "E", 4, aspects={"clarity": 2, "rigor": 5})}
        d = Dataset(papers=papers, reviews=reviews, scale=SIMPLE_SCALE)
        stats = score_stat_features(d, "a")
        sds = stats[1::4]
        assert np.all(sds == 0.0)
        concat = score_concat_features(d, "a", max_reviews=3)
        vec = [4, 2, 5]
        assert concat.tolist() == vec * 3  # padding repeats the single score vector

    def test_matches_independent_stats(self, synth_small):
        dataset, _ = synth_small
        for pid in list(dataset.papers)[:5]:
            reviews = dataset.reviews_of_paper(pid)
            got = score_stat_features(dataset, pid)
            expected = []
            names = ["overall", *dataset.scale.aspect_names]
            for k, name in enumerate(names):
                vals = [
                    r.overall_score if name == "overall" else r.aspect_scores[name] for r in reviews
                ]
                expected.extend(stats_oracle(vals))
            assert got == pytest.approx(expected, abs=1e-12)

    def test_concat_ordered_by_review_id_and_padded(self):
        d = two_paper_dataset(scores_a=(2, 4), scores_b=(3,))
        vec = score_concat_features(d, "b", max_reviews=2)
        assert vec.tolist() == [3, 3, 3, 3, 3, 3]
        full = score_features(d, "a")
        assert len(full) == 4 * 3 + 2 * 3

    def test_review_order_irrelevant(self):
        d1 = two_paper_dataset()
        papers = dict(d1.papers)
        reviews = dict(reversed(list(d1.reviews.items())))
        d2 = Dataset(papers=papers, reviews=reviews, scale=SIMPLE_SCALE)
        for pid in papers:
            assert score_features(d1, pid) == pytest.approx(score_features(d2, pid))


class TestRelatedness:
    def test_identical_vectors(self):
        v = np.array([1.0, 2.0])
        assert relatedness_feature([v, v]) == pytest.approx(1.0)

    def test_orthogonal_vectors(self):
        assert relatedness_feature([np.array([1.0, 0.0]), np.array([0.0, 1.0])]) == pytest.approx(0.0)

    def test_single_review_defined_as_one(self):
        assert relatedness_feature([np.array([1.0, 0.0])]) == 1.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ComputationError):
            relatedness_feature([np.zeros(2), np.ones(2)])

    def test_three_vectors_match_pairwise_loop(self):
        rng = np.random.default_rng(8)
        vs = [rng.standard_normal(5) for _ in range(3)]
        def cos(a, b):
            return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
        expected = (cos(vs[0], vs[1]) + cos(vs[0], vs[2]) + cos(vs[1], vs[2])) / 3
        assert relatedness_feature(vs) == pytest.approx(expected, abs=1e-12)


class TestAssembly:
    def test_identical_reviews_standardize_to_zero(self):
        d = two_paper_dataset(scores_a=(3, 3), scores_b=(3, 3))
        # make aspect scores identical too
        reviews = {
            rid: make_review(rid, r.paper_id, r.referee_id, 3, aspects={"clarity": 3, "rigor": 3})
            for rid, r in d.reviews.items()
        }
        d = Dataset(papers=d.papers, reviews=reviews, scale=SIMPLE_SCALE)
        feats = assemble(d, SCORE_ONLY)
        for fv in feats.values():
            assert np.all(fv.values == 0.0)

    def test_standardized_moments(self, synth_small):
        dataset, _ = synth_small
        feats = assemble(dataset, SCORE_ONLY)
        _, X = feature_matrix(feats)
        means = X.mean(axis=0)
        sds = X.std(axis=0)
        assert np.all(np.abs(means) < 1e-9)
        assert np.all((np.abs(sds - 1.0) < 1e-9) | (sds < 1e-9))

    def test_standardization_idempotent(self, synth_small):
        dataset, _ = synth_small
        assembler = FeatureAssembler(config=SCORE_ONLY).fit(dataset)
        once = assembler.transform(dataset)
        _, X1 = feature_matrix(once)
        mean2 = X1.mean(axis=0)
        sd2 = np.where(X1.std(axis=0) == 0, 1, X1.std(axis=0))
        X2 = (X1 - mean2) / sd2
        assert np.max(np.abs(X2 - X1)) < 1e-9

    def test_full_blocks_dimension_bookkeeping(self, synth_small):
        dataset, utils = synth_small
        table = synthetic_text_features(dataset, utils, dim=8, seed=1)
        feats = assemble(dataset, ACCEPT_OPT, table)
        ids, X = feature_matrix(feats)
        n_scores = 1 + len(dataset.scale.aspect_names)
        max_reviews = max(len(rs) for rs in dataset.by_paper().values())
        expected = 4 * n_scores + max_reviews * n_scores + 3 * 8 + 3 * 8 + 1
        assert X.shape == (len(dataset.papers), expected)
        layout = feats[ids[0]].layout
        assert [b for b, _ in layout.blocks] == [
            "score-stats", "score-concat", "embed-sections", "embed-section-means", "embed-relatedness",
        ]

    def test_cite_opt_restricts_sections(self, synth_small):
        dataset, utils = synth_small
        table = synthetic_text_features(dataset, utils, dim=4, seed=1)
        feats = assemble(dataset, CITE_OPT, table)
        layout = next(iter(feats.values())).layout
        embed_cols = [c for c in layout.columns if c.startswith("embed:")]
        assert embed_cols and all(c.split(":")[1] == "summary_contributions" for c in embed_cols)
        assert any(c.startswith("discourse:") for c in layout.columns)

    def test_deterministic(self, synth_small):
        dataset, utils = synth_small
        table = synthetic_text_features(dataset, utils, seed=2)
        a = feature_matrix(assemble(dataset, ACCEPT_OPT, table))[1]
        b = feature_matrix(assemble(dataset, ACCEPT_OPT, table))[1]
        assert np.array_equal(a, b)

    def test_missing_text_features_raises(self, synth_small):
        with pytest.raises(CoverageError):
            assemble(synth_small[0], ACCEPT_OPT, None)

    def test_missing_paper_coverage(self, synth_small):
        dataset, utils = synth_small
        table = synthetic_text_features(dataset, utils, seed=2)
        short = TextFeatureTable(
            paper_ids=table.paper_ids[:-1], columns=table.columns, values=table.values[:-1]
        )
        with pytest.raises(CoverageError):
            assemble(dataset, ACCEPT_OPT, short)

    def test_at_least_one_block(self):
        with pytest.raises(ConfigError):
            FeatureConfig(blocks=())


class TestTextFeatureFile:
    def test_round_trip(self, tmp_path, synth_small):
        dataset, utils = synth_small
        table = synthetic_text_features(dataset, utils, dim=3, seed=4)
        path = tmp_path / "tf.csv"
        write_text_features(table, path)
        again = read_text_features(path)
        assert again.paper_ids == table.paper_ids
        assert again.columns == table.columns
        assert np.allclose(again.values, table.values, atol=1e-15)

    def test_validator_rejects_bad_discourse_sum(self):
        cols = text_feature_columns(["evaluation", "nonarg"], ["strengths"], 2)
        values = np.array([[0.9, 0.3, 0.1, 0.2, 0.1, 0.2, 0.5]])
        table = TextFeatureTable(paper_ids=["p1"], columns=cols, values=values)
        with pytest.raises(SchemaError, match="sum"):
            validate_text_features(table)

    def test_validator_rejects_nonfinite(self):
        cols = text_feature_columns(["evaluation", "nonarg"], ["strengths"], 1)
        values = np.array([[0.5, 0.5, np.nan, 0.1, 0.9]])
        table = TextFeatureTable(paper_ids=["p1"], columns=cols, values=values)
        with pytest.raises(SchemaError, match="finite"):
            validate_text_features(table)

    def test_validator_rejects_unknown_column(self):
        table = TextFeatureTable(paper_ids=["p1"], columns=["bogus"], values=np.array([[1.0]]))
        with pytest.raises(SchemaError, match="bogus"):
            validate_text_features(table)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "tf.csv"
        path.write_text("nope,discourse:x\np1,0.5\n")
        with pytest.raises(SchemaError):
            read_text_features(path)
