"""Domain model for papers, reviews and referees plus dataset ingestion.

The interchange format is JSON-lines: one reviews file, one papers file and a
JSON scale document declaring the overall and per-aspect score ranges.  A
:class:`Dataset` is validated on construction and treated as immutable
afterwards, so it is safe to share between workers.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import IntegrityError, ParseError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScaleSpec:
    """Declared score ranges: integer bounds for the overall score and each aspect.

    ``aspects`` maps aspect name to an inclusive ``(min, max)`` pair; its
    insertion order is the canonical aspect order used everywhere downstream
    (feature layouts, commensuration weights).
    """

    overall_min: int
    overall_max: int
    aspects: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.overall_min >= self.overall_max:
            raise ValidationError(
                f"overall scale must satisfy min < max, got [{self.overall_min}, {self.overall_max}]"
            )
        for name, (lo, hi) in self.aspects.items():
            if lo >= hi:
                raise ValidationError(f"aspect {name!r} scale must satisfy min < max, got [{lo}, {hi}]")

    @property
    def aspect_names(self) -> tuple[str, ...]:
        return tuple(self.aspects)

    def aspect_bounds(self, name: str) -> tuple[int, int]:
        try:
            return self.aspects[name]
        except KeyError:
            raise ValidationError(f"unknown aspect {name!r}") from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ScaleSpec":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            overall = doc["overall"]
            aspects = {name: (int(rng["min"]), int(rng["max"])) for name, rng in doc.get("aspects", {}).items()}
            return cls(int(overall["min"]), int(overall["max"]), aspects)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed scale spec {path}: {exc}") from exc

    def to_json(self, path: str | Path) -> None:
        doc = {
            "overall": {"min": self.overall_min, "max": self.overall_max},
            "aspects": {name: {"min": lo, "max": hi} for name, (lo, hi) in self.aspects.items()},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


#: Scale shaped like the ACL-2018 review form: overall on 1..6, six aspects on 1..5.
ACL_LIKE_SCALE = ScaleSpec(
    overall_min=1,
    overall_max=6,
    aspects={
        "originality": (1, 5),
        "soundness": (1, 5),
        "substance": (1, 5),
        "replicability": (1, 5),
        "comparison": (1, 5),
        "readability": (1, 5),
    },
)


@dataclass(frozen=True)
class Paper:
    paper_id: str
    track: str
    accepted: Optional[bool] = None
    citation_count: Optional[int] = None

    def __post_init__(self):
        if self.citation_count is not None:
            if self.citation_count < 0:
                raise ValidationError(f"paper {self.paper_id}: citation_count must be non-negative")
            if self.accepted is None:
                raise ValidationError(
                    f"paper {self.paper_id}: citation_count given without an acceptance label"
                )


@dataclass(frozen=True)
class Review:
    """One referee's evaluation of one paper."""

    review_id: str
    paper_id: str
    referee_id: str
    overall_score: float
    aspect_scores: Mapping[str, float] = field(default_factory=dict)
    confidence: Optional[float] = None
    sections: Mapping[str, str] = field(default_factory=dict)

    def validate_scale(self, scale: ScaleSpec) -> None:
        if not scale.overall_min <= self.overall_score <= scale.overall_max:
            raise ValidationError(
                f"review {self.review_id}: overall_score {self.overall_score} outside "
                f"[{scale.overall_min}, {scale.overall_max}]"
            )
        for name, value in self.aspect_scores.items():
            lo, hi = scale.aspect_bounds(name)
            if not lo <= value <= hi:
                raise ValidationError(
                    f"review {self.review_id}: aspect {name!r} score {value} outside [{lo}, {hi}]"
                )


@dataclass(frozen=True)
class Dataset:
    """Validated collection of papers and reviews under one scale.

    Construction checks referential integrity (every review resolves, one
    review per (referee, paper) pair, every paper reviewed at least once) and
    that all scores lie within the scale bounds.
    """

    papers: Mapping[str, Paper]
    reviews: Mapping[str, Review]
    scale: ScaleSpec

    def __post_init__(self):
        if not self.papers:
            raise ValidationError("dataset contains no papers")
        seen_pairs = set()
        reviewed = set()
        for review in self.reviews.values():
            if review.paper_id not in self.papers:
                raise IntegrityError(f"review {review.review_id}: unknown paper {review.paper_id!r}")
            key = (review.referee_id, review.paper_id)
            if key in seen_pairs:
                raise IntegrityError(
                    f"duplicate review by referee {review.referee_id!r} on paper {review.paper_id!r}"
                )
            seen_pairs.add(key)
            reviewed.add(review.paper_id)
            review.validate_scale(self.scale)
        unreviewed = set(self.papers) - reviewed
        if unreviewed:
            raise IntegrityError(f"papers without any review: {sorted(unreviewed)[:5]}")

    # -- derived indexes ------------------------------------------------

    def reviews_of_paper(self, paper_id: str) -> list[Review]:
        if paper_id not in self.papers:
            raise KeyError(f"unknown paper {paper_id!r}")
        found = [r for r in self.reviews.values() if r.paper_id == paper_id]
        return sorted(found, key=lambda r: r.review_id)

    def referee_ids(self) -> list[str]:
        return sorted({r.referee_id for r in self.reviews.values()})

    def paper_ids(self) -> list[str]:
        return sorted(self.papers)

    def by_paper(self) -> dict[str, list[Review]]:
        """All reviews grouped by paper, each group sorted by review_id."""
        groups: dict[str, list[Review]] = {pid: [] for pid in self.papers}
        for review in self.reviews.values():
            groups[review.paper_id].append(review)
        for reviews in groups.values():
            reviews.sort(key=lambda r: r.review_id)
        return groups

    def by_referee(self) -> dict[str, list[Review]]:
        groups: dict[str, list[Review]] = {}
        for review in self.reviews.values():
            groups.setdefault(review.referee_id, []).append(review)
        for reviews in groups.values():
            reviews.sort(key=lambda r: r.review_id)
        return groups


def referee_portfolio(dataset: Dataset, referee_id: str) -> tuple[list[Review], list[str]]:
    """The referee's reviews and the papers they cover (one review per paper)."""
    reviews = [r for r in dataset.reviews.values() if r.referee_id == referee_id]
    if not reviews:
        raise KeyError(f"unknown referee {referee_id!r}")
    reviews.sort(key=lambda r: r.review_id)
    return reviews, [r.paper_id for r in reviews]


@dataclass(frozen=True)
class DatasetStats:
    n_papers: int
    n_reviews: int
    reviews_per_paper: tuple[float, float]
    reviews_per_referee: tuple[float, float]

    def format_lines(self) -> list[str]:
        rp_mean, rp_sd = self.reviews_per_paper
        rr_mean, rr_sd = self.reviews_per_referee
        return [
            f"papers:              {self.n_papers}",
            f"reviews:             {self.n_reviews}",
            f"reviews per paper:   {rp_mean:.2f} +- {rp_sd:.2f}",
            f"reviews per referee: {rr_mean:.2f} +- {rr_sd:.2f}",
        ]


def _mean_sd(counts: list[int]) -> tuple[float, float]:
    n = len(counts)
    mean = sum(counts) / n
    var = sum((c - mean) ** 2 for c in counts) / n
    return mean, math.sqrt(var)


def dataset_stats(dataset: Dataset) -> DatasetStats:
    per_paper = [len(reviews) for reviews in dataset.by_paper().values()]
    per_referee = [len(reviews) for reviews in dataset.by_referee().values()]
    return DatasetStats(
        n_papers=len(dataset.papers),
        n_reviews=len(dataset.reviews),
        reviews_per_paper=_mean_sd(per_paper),
        reviews_per_referee=_mean_sd(per_referee),
    )


# -- ingestion ------------------------------------------------------------


def _iter_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def _require_fields(record: dict, fields: tuple[str, ...], path, lineno: int) -> None:
    missing = [f for f in fields if f not in record]
    if missing:
        raise ParseError(f"{path}:{lineno}: missing fields {missing}")


def load_dataset(reviews_path: str | Path, papers_path: str | Path, scale: ScaleSpec) -> Dataset:
    """Load and validate a dataset from the JSON-lines interchange files.

    Logs the summary statistics (paper/review counts, reviews per paper and
    per referee) after a successful load.
    """
    papers: dict[str, Paper] = {}
    for lineno, record in _iter_jsonl(papers_path):
        _require_fields(record, ("paper_id", "track"), papers_path, lineno)
        pid = str(record["paper_id"])
        if pid in papers:
            raise IntegrityError(f"{papers_path}:{lineno}: duplicate paper_id {pid!r}")
        accepted = record.get("accepted")
        citation = record.get("citation_count")
        try:
            papers[pid] = Paper(
                paper_id=pid,
                track=str(record["track"]),
                accepted=None if accepted is None else bool(accepted),
                citation_count=None if citation is None else int(citation),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{papers_path}:{lineno}: bad field value ({exc})") from exc

    reviews: dict[str, Review] = {}
    for lineno, record in _iter_jsonl(reviews_path):
        _require_fields(record, ("review_id", "paper_id", "referee_id", "overall_score"), reviews_path, lineno)
        rid = str(record["review_id"])
        if rid in reviews:
            raise IntegrityError(f"{reviews_path}:{lineno}: duplicate review_id {rid!r}")
        confidence = record.get("confidence")
        try:
            reviews[rid] = Review(
                review_id=rid,
                paper_id=str(record["paper_id"]),
                referee_id=str(record["referee_id"]),
                overall_score=float(record["overall_score"]),
                aspect_scores={str(k): float(v) for k, v in record.get("aspect_scores", {}).items()},
                confidence=None if confidence is None else float(confidence),
                sections={str(k): str(v) for k, v in record.get("sections", {}).items()},
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{reviews_path}:{lineno}: bad field value ({exc})") from exc

    dataset = Dataset(papers=papers, reviews=reviews, scale=scale)
    stats = dataset_stats(dataset)
    for line in stats.format_lines():
        logger.info("%s", line)
    return dataset


def write_dataset(dataset: Dataset, reviews_path: str | Path, papers_path: str | Path) -> None:
    """Emit the dataset back into the interchange format (sorted by id)."""
    with open(papers_path, "w", encoding="utf-8") as fh:
        for pid in sorted(dataset.papers):
            paper = dataset.papers[pid]
            fh.write(
                json.dumps(
                    {
                        "paper_id": paper.paper_id,
                        "track": paper.track,
                        "accepted": paper.accepted,
                        "citation_count": paper.citation_count,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(reviews_path, "w", encoding="utf-8") as fh:
        for rid in sorted(dataset.reviews):
            review = dataset.reviews[rid]
            fh.write(
                json.dumps(
                    {
                        "review_id": review.review_id,
                        "paper_id": review.paper_id,
                        "referee_id": review.referee_id,
                        "overall_score": review.overall_score,
                        "aspect_scores": dict(review.aspect_scores),
                        "confidence": review.confidence,
                        "sections": dict(review.sections),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
