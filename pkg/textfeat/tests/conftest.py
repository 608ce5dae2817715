import json

import pytest


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@pytest.fixture
def hand_reviews(tmp_path):
    """Two papers with letter-countable sentences (mock embedding dim 4:
    counts of a, b, c, d)."""
    records = [
        {
            "review_id": "r1",
            "paper_id": "p1",
            "referee_id": "e1",
            "overall_score": 4,
            "sections": {
                "strengths": "a cab. a bad cad.",
                "weaknesses": "",
            },
        },
        {
            "review_id": "r2",
            "paper_id": "p1",
            "referee_id": "e2",
            "overall_score": 3,
            "sections": {
                "strengths": "dad adds a bad cd.",
                "weaknesses": "b c d.",
            },
        },
        {
            "review_id": "r3",
            "paper_id": "p2",
            "referee_id": "e1",
            "overall_score": 5,
            "sections": {
                "strengths": "a cab.",
                "weaknesses": "",
            },
        },
    ]
    path = tmp_path / "reviews.jsonl"
    write_jsonl(path, records)
    return path
