"""Per-paper review-text feature extraction and CSV emission.

Conventions (shared with the consumer's schema): a review's section
embedding is the mean of its sentence embeddings, zero for an empty section
(flagged in the capabilities sidecar); ``embed:<section>:<i>`` averages
those per-review vectors across the paper's reviews; ``embedmean`` pools
all sentences of the section across reviews before averaging; the
relatedness value is the mean pairwise cosine of the reviews' first
sentences (1.0 when fewer than two usable first sentences exist).  A paper
whose reviews contain no sentences at all gets full non-argumentative mass.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .backends import DiscourseBackend, EmbeddingBackend
from .sentences import split_sentences

AMPERE_LABELS = ("evaluation", "request", "fact", "reference", "quote", "nonarg")

RELATEDNESS_COLUMN = "related:first_sentence_cosine"


def read_reviews(path: str | Path) -> dict[str, list[dict]]:
    """Group the reviews file by paper; keeps each review's section order."""
    by_paper: dict[str, list[dict]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            for key in ("review_id", "paper_id"):
                if key not in record:
                    raise ValueError(f"{path}:{lineno}: missing {key}")
            by_paper.setdefault(str(record["paper_id"]), []).append(
                {
                    "review_id": str(record["review_id"]),
                    "sections": {str(k): str(v) for k, v in record.get("sections", {}).items()},
                }
            )
    for reviews in by_paper.values():
        reviews.sort(key=lambda r: r["review_id"])
    return by_paper


def section_universe(by_paper: Mapping[str, list[dict]]) -> list[str]:
    names = {s for reviews in by_paper.values() for r in reviews for s in r["sections"]}
    return sorted(names)


def embed_sections(
    reviews: Sequence[dict],
    sections: Sequence[str],
    backend: EmbeddingBackend,
) -> tuple[list[dict[str, np.ndarray]], dict[str, np.ndarray], dict[str, np.ndarray], dict[str, int]]:
    """Per-review section means, their across-review average, the
    sentence-pooled per-section means, and an empty-section flag count."""
    zero = np.zeros(backend.dim)
    per_review: list[dict[str, np.ndarray]] = []
    pooled_sentences: dict[str, list[np.ndarray]] = {s: [] for s in sections}
    empty_flags = {s: 0 for s in sections}
    for review in reviews:
        vectors: dict[str, np.ndarray] = {}
        for section in sections:
            sentences = split_sentences(review["sections"].get(section, ""))
            if not sentences:
                vectors[section] = zero.copy()
                empty_flags[section] += 1
                continue
            encoded = backend.encode(sentences)
            vectors[section] = encoded.mean(axis=0)
            pooled_sentences[section].extend(encoded)
        per_review.append(vectors)
    cross_review = {
        s: np.mean([v[s] for v in per_review], axis=0) if per_review else zero.copy()
        for s in sections
    }
    pooled = {
        s: (np.mean(pooled_sentences[s], axis=0) if pooled_sentences[s] else zero.copy())
        for s in sections
    }
    return per_review, cross_review, pooled, empty_flags


def discourse_distribution(
    reviews: Sequence[dict], classifier: DiscourseBackend
) -> dict[str, float]:
    """Label proportions over all sentences of all the paper's reviews."""
    sentences: list[str] = []
    for review in reviews:
        for text in review["sections"].values():
            sentences.extend(split_sentences(text))
    labels = list(classifier.labels)
    if not sentences:
        # a silent review set is trivially non-argumentative
        return {label: (1.0 if label == "nonarg" else 0.0) for label in labels}
    assigned = classifier.classify(sentences)
    unknown = set(assigned) - set(labels)
    if unknown:
        raise ValueError(f"classifier emitted labels outside its declared set: {sorted(unknown)}")
    return {label: assigned.count(label) / len(assigned) for label in labels}


def first_sentence_relatedness(reviews: Sequence[dict], backend: EmbeddingBackend) -> float:
    """Mean pairwise cosine between the reviews' first sentences.

    Scans each review's sections in stored order for its first sentence;
    zero-norm embeddings are unusable and skipped.  Fewer than two usable
    first sentences mean a trivially self-consistent single voice: 1.0.
    """
    firsts = []
    for review in reviews:
        for text in review["sections"].values():
            sentences = split_sentences(text)
            if sentences:
                firsts.append(sentences[0])
                break
    if len(firsts) < 2:
        return 1.0
    encoded = backend.encode(firsts)
    norms = np.linalg.norm(encoded, axis=1)
    usable = encoded[norms > 0]
    if len(usable) < 2:
        return 1.0
    sims = []
    for i in range(len(usable)):
        for j in range(i + 1, len(usable)):
            sims.append(
                float(
                    usable[i] @ usable[j]
                    / (np.linalg.norm(usable[i]) * np.linalg.norm(usable[j]))
                )
            )
    return float(np.mean(sims))


@dataclass
class PaperFeatures:
    paper_id: str
    section_means: dict[str, np.ndarray]
    section_pooled: dict[str, np.ndarray]
    relatedness: float
    discourse: Optional[dict[str, float]]
    empty_sections: dict[str, int] = field(default_factory=dict)


@dataclass
class FeatureTable:
    paper_ids: list[str]
    columns: list[str]
    values: np.ndarray
    capabilities: dict = field(default_factory=dict)


def extract_table(
    by_paper: Mapping[str, list[dict]],
    embedder: EmbeddingBackend,
    classifier: Optional[DiscourseBackend],
    sections: Optional[Sequence[str]] = None,
) -> FeatureTable:
    """Run extraction for every paper and assemble the contract columns."""
    sections = list(sections) if sections is not None else section_universe(by_paper)
    if not sections:
        raise ValueError("reviews contain no text sections; nothing to extract")
    dim = embedder.dim
    labels = list(classifier.labels) if classifier is not None else []

    columns = [f"discourse:{label}" for label in labels]
    columns += [f"embed:{s}:{i}" for s in sections for i in range(dim)]
    columns += [f"embedmean:{s}:{i}" for s in sections for i in range(dim)]
    columns.append(RELATEDNESS_COLUMN)

    paper_ids = sorted(by_paper)
    values = np.zeros((len(paper_ids), len(columns)))
    empty_flags: dict[str, dict[str, int]] = {}
    for row, pid in enumerate(paper_ids):
        features = extract_paper(pid, by_paper[pid], sections, embedder, classifier)
        cells: list[float] = []
        if features.discourse is not None:
            cells.extend(features.discourse[label] for label in labels)
        for s in sections:
            cells.extend(features.section_means[s].tolist())
        for s in sections:
            cells.extend(features.section_pooled[s].tolist())
        cells.append(features.relatedness)
        values[row] = cells
        flagged = {s: n for s, n in features.empty_sections.items() if n}
        if flagged:
            empty_flags[pid] = flagged

    return FeatureTable(
        paper_ids=paper_ids,
        columns=columns,
        values=values,
        capabilities={
            "discourse": classifier is not None,
            "embedding_dim": dim,
            "sections": sections,
            "empty_section_reviews": empty_flags,
        },
    )


def extract_paper(
    paper_id: str,
    reviews: Sequence[dict],
    sections: Sequence[str],
    embedder: EmbeddingBackend,
    classifier: Optional[DiscourseBackend],
) -> PaperFeatures:
    _, cross_review, pooled, empty = embed_sections(reviews, sections, embedder)
    return PaperFeatures(
        paper_id=paper_id,
        section_means=cross_review,
        section_pooled=pooled,
        relatedness=first_sentence_relatedness(reviews, embedder),
        discourse=discourse_distribution(reviews, classifier) if classifier is not None else None,
        empty_sections=empty,
    )


def write_feature_csv(table: FeatureTable, path: str | Path) -> None:
    """Atomic write (temp file + rename), rows in paper_id order, plus a
    capabilities sidecar JSON."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(["paper_id", *table.columns]) + "\n")
            for i, pid in enumerate(table.paper_ids):
                fh.write(",".join([pid, *(f"{v:.17g}" for v in table.values[i])]) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    with open(f"{path}.capabilities.json", "w", encoding="utf-8") as fh:
        json.dump(table.capabilities, fh, indent=2, sort_keys=True)
        fh.write("\n")
