"""Per-referee partial rankings and the preference-pair multiset they imply.

Only the overall score enters here: each referee's reviews are grouped by
overall score into an ordered partition, and every unordered pair of papers
in a portfolio yields exactly one preference pair (strict where the scores
differ, tie where they are equal).  The extraction depends only on the
within-referee score order, so any strictly increasing rescaling of one
referee's scores leaves the output unchanged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .data import Dataset
from .errors import ConfigError

STRICT = "strict"
TIE = "tie"

PAIR_FILTERS = ("keep-all", "drop-ties", "drop-cross-track")


@dataclass(frozen=True)
class PartialRanking:
    """Ordered partition of one referee's papers; earlier group = lower score."""

    referee_id: str
    groups: tuple[tuple[str, ...], ...]

    def papers(self) -> list[str]:
        return [pid for group in self.groups for pid in group]


@dataclass(frozen=True)
class PreferencePair:
    better: str
    worse: str
    relation: str
    referee_id: str

    def __post_init__(self):
        if self.better == self.worse:
            raise ValueError(f"self-pair on {self.better!r}")
        if self.relation not in (STRICT, TIE):
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.relation == TIE and self.worse < self.better:
            # canonical tie orientation: lexicographically smaller id first
            lo, hi = self.worse, self.better
            object.__setattr__(self, "better", lo)
            object.__setattr__(self, "worse", hi)

    @classmethod
    def strict(cls, better: str, worse: str, referee_id: str) -> "PreferencePair":
        return cls(better=better, worse=worse, relation=STRICT, referee_id=referee_id)

    @classmethod
    def tie(cls, a: str, b: str, referee_id: str) -> "PreferencePair":
        lo, hi = sorted((a, b))
        return cls(better=lo, worse=hi, relation=TIE, referee_id=referee_id)


def partial_ranking(dataset: Dataset, referee_id: str) -> PartialRanking:
    """Group the referee's papers by overall score, ascending."""
    reviews = [r for r in dataset.reviews.values() if r.referee_id == referee_id]
    if not reviews:
        raise KeyError(f"unknown referee {referee_id!r}")
    by_score: dict[float, list[str]] = {}
    for review in reviews:
        by_score.setdefault(review.overall_score, []).append(review.paper_id)
    groups = tuple(tuple(sorted(by_score[s])) for s in sorted(by_score))
    return PartialRanking(referee_id=referee_id, groups=groups)


def _pairs_of_referee(reviews) -> Iterable[PreferencePair]:
    scored = sorted((r.paper_id, r.overall_score) for r in reviews)
    for (pa, sa), (pb, sb) in combinations(scored, 2):
        if sa == sb:
            yield PreferencePair.tie(pa, pb, reviews[0].referee_id)
        elif sa > sb:
            yield PreferencePair.strict(pa, pb, reviews[0].referee_id)
        else:
            yield PreferencePair.strict(pb, pa, reviews[0].referee_id)


def preference_pairs(dataset: Dataset) -> list[PreferencePair]:
    """Enumerate the implied pairs of every referee, joined into one multiset.

    Emits exactly k*(k-1)/2 pairs for a referee with k reviews.  The returned
    list is canonically ordered (referee_id, then pair ids) so results do not
    depend on iteration schedule.
    """
    pairs: list[PreferencePair] = []
    for referee_id, reviews in dataset.by_referee().items():
        pairs.extend(_pairs_of_referee(reviews))
    pairs.sort(key=lambda p: (p.referee_id, p.better, p.worse, p.relation))
    return pairs


def filter_pairs(
    pairs: Sequence[PreferencePair],
    policy: str,
    tracks: Optional[Mapping[str, str]] = None,
) -> list[PreferencePair]:
    """Apply one of the shipped pair filters.

    ``drop-ties`` produces the strict-only input the consensus rankers need;
    ``drop-cross-track`` needs a paper -> track mapping.
    """
    if policy == "keep-all":
        return list(pairs)
    if policy == "drop-ties":
        return [p for p in pairs if p.relation == STRICT]
    if policy == "drop-cross-track":
        if tracks is None:
            raise ConfigError("drop-cross-track requires a paper->track mapping")
        return [p for p in pairs if tracks[p.better] == tracks[p.worse]]
    raise ConfigError(f"unknown pair filter {policy!r}; expected one of {PAIR_FILTERS}")


def write_pairs(pairs: Sequence[PreferencePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["referee_id", "better", "worse", "relation"])
        for pair in pairs:
            writer.writerow([pair.referee_id, pair.better, pair.worse, pair.relation])
