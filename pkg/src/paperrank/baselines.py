"""Score-aggregation baselines over overall scores.

``mean-s-w`` weights each overall score by the referee-provided confidence
(missing confidences fall back to a configurable default weight), ``median-s``
takes the median, and ``major-s`` the most frequent score, falling back to the
plain mean when several scores share the top frequency.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ComputationError, ConfigError
from .ranking import RankingResult

BASELINE_METHODS = ("mean-s-w", "median-s", "major-s")


@dataclass(frozen=True)
class BaselineSpec:
    method: str
    missing_confidence_weight: float = 1.0

    def __post_init__(self):
        if self.method not in BASELINE_METHODS:
            raise ConfigError(f"unknown baseline {self.method!r}; expected one of {BASELINE_METHODS}")


def _weighted_mean(reviews, default_weight: float, paper_id: str) -> float:
    scores = np.array([r.overall_score for r in reviews], dtype=float)
    weights = np.array(
        [r.confidence if r.confidence is not None else default_weight for r in reviews],
        dtype=float,
    )
    total = weights.sum()
    if total <= 0:
        raise ComputationError(f"paper {paper_id}: total confidence weight {total} is not positive")
    return float(np.dot(weights, scores) / total)


def _majority(reviews) -> float:
    scores = [r.overall_score for r in reviews]
    counts = Counter(scores)
    top = max(counts.values())
    modes = [s for s, c in counts.items() if c == top]
    if len(modes) == 1:
        return float(modes[0])
    return float(np.mean(scores))


def rank_baseline(dataset: Dataset, spec: BaselineSpec) -> RankingResult:
    """Rank all papers of the dataset by the requested aggregate."""
    utilities: dict[str, float] = {}
    for paper_id, reviews in dataset.by_paper().items():
        if spec.method == "mean-s-w":
            utilities[paper_id] = _weighted_mean(reviews, spec.missing_confidence_weight, paper_id)
        elif spec.method == "median-s":
            utilities[paper_id] = float(np.median([r.overall_score for r in reviews]))
        else:
            utilities[paper_id] = _majority(reviews)
    config = {"method": spec.method, "missing_confidence_weight": spec.missing_confidence_weight}
    return RankingResult.from_utilities(spec.method, utilities, config=config)
