import json

import pytest

from paperrank import Dataset, Paper, Review, ScaleSpec, SyntheticConfig, generate_synthetic

SIMPLE_SCALE = ScaleSpec(overall_min=1, overall_max=6, aspects={"clarity": (1, 5), "rigor": (1, 5)})


def make_review(rid, pid, eid, overall, aspects=None, confidence=None, sections=None):
    return Review(
        review_id=rid,
        paper_id=pid,
        referee_id=eid,
        overall_score=overall,
        aspect_scores=aspects or {"clarity": 3, "rigor": 3},
        confidence=confidence,
        sections=sections or {},
    )


@pytest.fixture
def tiny_dataset():
    """Three papers, two referees; referee A orders x=2, y=1, z=3."""
    papers = {p: Paper(paper_id=p, track="main") for p in ("x", "y", "z")}
    reviews = {
        "r1": make_review("r1", "x", "A", 2),
        "r2": make_review("r2", "y", "A", 1),
        "r3": make_review("r3", "z", "A", 3),
        "r4": make_review("r4", "x", "B", 4, confidence=1.0),
        "r5": make_review("r5", "y", "B", 4, confidence=3.0),
        "r6": make_review("r6", "z", "B", 5, confidence=2.0),
    }
    return Dataset(papers=papers, reviews=reviews, scale=SIMPLE_SCALE)


@pytest.fixture
def synth_small():
    cfg = SyntheticConfig(n_papers=25, n_referees=8, reviews_per_paper=3, bias_spread=1.0, score_noise=0.6)
    return generate_synthetic(cfg, seed=11)


def write_interchange(tmp_path, dataset):
    """Write dataset + scale to the interchange files, return the three paths."""
    from paperrank import write_dataset

    reviews = tmp_path / "reviews.jsonl"
    papers = tmp_path / "papers.jsonl"
    scale = tmp_path / "scale.json"
    write_dataset(dataset, reviews, papers)
    dataset.scale.to_json(scale)
    return str(reviews), str(papers), str(scale)


def jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
