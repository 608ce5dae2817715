"""Fixed-layout per-paper feature vectors.

Three sources feed the vectors: statistics over review scores, an optional
text-feature CSV produced offline (discourse-label proportions, per-section
review embeddings, a first-sentence relatedness score), and nothing else.
Blocks appear in a canonical order and non-embedding blocks are standardized
to zero mean and unit variance across the papers of a dataset; embedding
blocks pass through unscaled.

The text-feature CSV contract: header ``paper_id`` first, then
``discourse:<label>`` proportion columns (summing to 1 per row),
``embed:<section>:<i>`` per-review-mean section embeddings averaged across
reviews, ``embedmean:<section>:<i>`` section means pooled over all sentences
of all reviews, and ``related:first_sentence_cosine``.  All values finite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .data import Dataset
from .errors import ComputationError, ConfigError, CoverageError, SchemaError

BLOCK_ORDER = (
    "score-stats",
    "score-concat",
    "discourse",
    "embed-sections",
    "embed-section-means",
    "embed-relatedness",
)

#: blocks standardized by default; embedding blocks pass through unscaled
STANDARDIZED_BLOCKS = ("score-stats", "score-concat", "discourse")

RELATEDNESS_COLUMN = "related:first_sentence_cosine"


# -- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class FeatureConfig:
    """Enabled blocks, optional per-block standardization overrides and an
    optional restriction of embedding blocks to named review sections."""

    blocks: tuple[str, ...]
    standardize: Mapping[str, bool] = field(default_factory=dict)
    embed_sections: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if not self.blocks:
            raise ConfigError("at least one feature block must be enabled")
        unknown = [b for b in self.blocks if b not in BLOCK_ORDER]
        if unknown:
            raise ConfigError(f"unknown feature blocks {unknown}; expected among {BLOCK_ORDER}")
        ordered = tuple(b for b in BLOCK_ORDER if b in self.blocks)
        object.__setattr__(self, "blocks", ordered)

    def is_standardized(self, block: str) -> bool:
        return self.standardize.get(block, block in STANDARDIZED_BLOCKS)

    def needs_text_features(self) -> bool:
        return any(b not in ("score-stats", "score-concat") for b in self.blocks)


ACCEPT_OPT = FeatureConfig(
    blocks=("score-stats", "score-concat", "embed-sections", "embed-section-means", "embed-relatedness")
)
CITE_OPT = FeatureConfig(
    blocks=("discourse", "embed-sections"),
    embed_sections=("summary_contributions",),
)
SCORE_ONLY = FeatureConfig(blocks=("score-stats", "score-concat"))

NAMED_CONFIGS = {"accept-opt": ACCEPT_OPT, "cite-opt": CITE_OPT, "score-only": SCORE_ONLY}


def feature_config(name: str) -> FeatureConfig:
    try:
        return NAMED_CONFIGS[name]
    except KeyError:
        raise ConfigError(f"unknown feature config {name!r}; expected one of {sorted(NAMED_CONFIGS)}") from None


# -- layout and vectors ------------------------------------------------------


@dataclass(frozen=True)
class FeatureLayout:
    """Ordered named blocks with their widths and per-column labels."""

    blocks: tuple[tuple[str, int], ...]
    columns: tuple[str, ...]

    def __post_init__(self):
        if sum(dim for _, dim in self.blocks) != len(self.columns):
            raise SchemaError("layout block widths do not add up to the column count")

    @property
    def dim(self) -> int:
        return len(self.columns)

    def block_slice(self, name: str) -> slice:
        offset = 0
        for block, dim in self.blocks:
            if block == name:
                return slice(offset, offset + dim)
            offset += dim
        raise KeyError(f"layout has no block {name!r}")


@dataclass(frozen=True)
class FeatureVector:
    paper_id: str
    values: np.ndarray
    layout: FeatureLayout

    def __post_init__(self):
        if len(self.values) != self.layout.dim:
            raise SchemaError(
                f"paper {self.paper_id}: vector length {len(self.values)} != layout dim {self.layout.dim}"
            )


def feature_matrix(features: Mapping[str, FeatureVector]) -> tuple[list[str], np.ndarray]:
    """Sorted paper ids and the stacked matrix; verifies a single layout."""
    ids = sorted(features)
    if not ids:
        raise SchemaError("empty feature map")
    layout = features[ids[0]].layout
    for pid in ids:
        if features[pid].layout != layout:
            raise SchemaError(f"paper {pid}: feature layout differs within one collection")
    return ids, np.vstack([features[pid].values for pid in ids])


# -- score-derived blocks -----------------------------------------------------


def _score_vector(review, aspect_names) -> list[float]:
    missing = [a for a in aspect_names if a not in review.aspect_scores]
    if missing:
        raise SchemaError(f"review {review.review_id}: missing aspect scores {missing}")
    return [review.overall_score] + [review.aspect_scores[a] for a in aspect_names]


def score_stat_features(dataset: Dataset, paper_id: str) -> np.ndarray:
    """mean, population sd, min, max of the overall and each aspect score."""
    reviews = dataset.reviews_of_paper(paper_id)
    aspect_names = dataset.scale.aspect_names
    vectors = np.array([_score_vector(r, aspect_names) for r in reviews], dtype=float)
    stats = np.stack(
        [vectors.mean(axis=0), vectors.std(axis=0), vectors.min(axis=0), vectors.max(axis=0)],
        axis=1,
    )
    return stats.ravel()


def score_concat_features(dataset: Dataset, paper_id: str, max_reviews: int) -> np.ndarray:
    """All reviews' score vectors, ordered by review_id, padded with the
    per-paper mean score vector up to ``max_reviews`` slots."""
    reviews = dataset.reviews_of_paper(paper_id)
    if len(reviews) > max_reviews:
        raise SchemaError(f"paper {paper_id}: {len(reviews)} reviews exceed the layout's {max_reviews} slots")
    aspect_names = dataset.scale.aspect_names
    vectors = [np.array(_score_vector(r, aspect_names), dtype=float) for r in reviews]
    mean_vec = np.mean(vectors, axis=0)
    vectors.extend([mean_vec] * (max_reviews - len(vectors)))
    return np.concatenate(vectors)


def score_features(dataset: Dataset, paper_id: str) -> np.ndarray:
    """Statistics block followed by the concatenation block for one paper."""
    max_reviews = max(len(rs) for rs in dataset.by_paper().values())
    return np.concatenate(
        [score_stat_features(dataset, paper_id), score_concat_features(dataset, paper_id, max_reviews)]
    )


def relatedness_feature(embeddings: Sequence[np.ndarray]) -> float:
    """Mean cosine similarity over all unordered pairs of review embeddings.

    A single voice is trivially self-consistent: fewer than two embeddings
    yield 1.0.  Zero vectors have no direction and raise.
    """
    if len(embeddings) < 2:
        return 1.0
    arrs = [np.asarray(e, dtype=float) for e in embeddings]
    norms = [np.linalg.norm(a) for a in arrs]
    if any(n == 0.0 for n in norms):
        raise ComputationError("cosine relatedness undefined for a zero embedding vector")
    sims = []
    for i in range(len(arrs)):
        for j in range(i + 1, len(arrs)):
            sims.append(float(np.dot(arrs[i], arrs[j]) / (norms[i] * norms[j])))
    return float(np.mean(sims))


# -- text-feature file --------------------------------------------------------


@dataclass(frozen=True)
class TextFeatureTable:
    paper_ids: list[str]
    columns: list[str]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_row_index", {pid: i for i, pid in enumerate(self.paper_ids)})

    def row(self, paper_id: str) -> np.ndarray:
        try:
            return self.values[self._row_index[paper_id]]
        except KeyError:
            raise CoverageError(f"text-feature file does not cover paper {paper_id!r}") from None


def text_feature_columns(
    discourse_labels: Sequence[str],
    sections: Sequence[str],
    dim: int,
) -> list[str]:
    """Canonical column list for a text-feature table."""
    cols = [f"discourse:{label}" for label in discourse_labels]
    cols += [f"embed:{s}:{i}" for s in sections for i in range(dim)]
    cols += [f"embedmean:{s}:{i}" for s in sections for i in range(dim)]
    cols.append(RELATEDNESS_COLUMN)
    return cols


def _check_column_grammar(columns: Sequence[str]) -> None:
    for col in columns:
        parts = col.split(":")
        if parts[0] == "discourse" and len(parts) == 2 and parts[1]:
            continue
        if parts[0] in ("embed", "embedmean") and len(parts) == 3 and parts[1] and parts[2].isdigit():
            continue
        if col == RELATEDNESS_COLUMN:
            continue
        raise SchemaError(f"unrecognized text-feature column {col!r}")


def validate_text_features(table: TextFeatureTable, tol: float = 1e-6) -> None:
    """Schema validation: column grammar, finite values, discourse rows
    forming a probability vector, relatedness within [-1, 1]."""
    _check_column_grammar(table.columns)
    if len(table.paper_ids) != len(set(table.paper_ids)):
        raise SchemaError("duplicate paper_id rows in text-feature table")
    if table.values.shape != (len(table.paper_ids), len(table.columns)):
        raise SchemaError("text-feature value matrix shape does not match ids x columns")
    if not np.all(np.isfinite(table.values)):
        raise SchemaError("text-feature table contains non-finite values")
    discourse_idx = [i for i, c in enumerate(table.columns) if c.startswith("discourse:")]
    if discourse_idx:
        block = table.values[:, discourse_idx]
        if block.min() < -tol or block.max() > 1 + tol:
            raise SchemaError("discourse proportions outside [0, 1]")
        sums = block.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > tol)[0]
        if bad.size:
            pid = table.paper_ids[bad[0]]
            raise SchemaError(f"discourse proportions of paper {pid} sum to {sums[bad[0]]:.8f}, not 1")
    if RELATEDNESS_COLUMN in table.columns:
        rel = table.values[:, table.columns.index(RELATEDNESS_COLUMN)]
        if rel.min() < -1 - tol or rel.max() > 1 + tol:
            raise SchemaError("relatedness cosine outside [-1, 1]")


def read_text_features(path: str | Path) -> TextFeatureTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty text-feature file") from None
        if not header or header[0] != "paper_id":
            raise SchemaError(f"{path}: first column must be paper_id")
        columns = header[1:]
        ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: non-numeric value ({exc})") from None
    table = TextFeatureTable(paper_ids=ids, columns=columns, values=np.array(rows, dtype=float))
    validate_text_features(table)
    return table


def write_text_features(table: TextFeatureTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["paper_id", *table.columns])
        for i, pid in enumerate(table.paper_ids):
            writer.writerow([pid, *(f"{v:.17g}" for v in table.values[i])])


# -- assembly -----------------------------------------------------------------


def _text_block_columns(table: TextFeatureTable, block: str, embed_sections) -> list[int]:
    if block == "discourse":
        return [i for i, c in enumerate(table.columns) if c.startswith("discourse:")]
    if block == "embed-relatedness":
        return [i for i, c in enumerate(table.columns) if c == RELATEDNESS_COLUMN]
    prefix = "embed:" if block == "embed-sections" else "embedmean:"
    idx = []
    for i, c in enumerate(table.columns):
        if not c.startswith(prefix):
            continue
        section = c.split(":")[1]
        if embed_sections is None or section in embed_sections:
            idx.append(i)
    return idx


class FeatureAssembler(TransformerMixin, BaseEstimator):
    """Two-pass assembler: fit() derives the layout and the per-column
    standardization moments from a dataset, transform() emits vectors.

    Standardized blocks map constant columns to zero.  Embedding blocks come
    from the text-feature table and pass through unscaled.
    """

    def __init__(self, config: Optional[FeatureConfig] = None, text_features: Optional[TextFeatureTable] = None):
        self.config = config
        self.text_features = text_features

    def _config(self) -> FeatureConfig:
        return self.config if self.config is not None else ACCEPT_OPT

    def fit(self, dataset: Dataset, y=None) -> "FeatureAssembler":
        cfg = self._config()
        if cfg.needs_text_features() and self.text_features is None:
            raise CoverageError(
                f"feature blocks {cfg.blocks} need a text-feature table but none was provided"
            )
        if self.text_features is not None:
            validate_text_features(self.text_features)
            missing = set(dataset.papers) - set(self.text_features.paper_ids)
            if missing and cfg.needs_text_features():
                raise CoverageError(f"text-feature file missing papers: {sorted(missing)[:5]}")

        self.max_reviews_ = max(len(rs) for rs in dataset.by_paper().values())
        self.layout_ = self._build_layout(dataset)
        raw = self._raw_matrix(dataset)
        self.mean_ = raw.mean(axis=0)
        sd = raw.std(axis=0)
        self.scale_ = np.where(sd == 0.0, 1.0, sd)
        self.constant_ = sd == 0.0
        self._fit_ids = dataset.paper_ids()
        return self

    def transform(self, dataset: Dataset) -> dict[str, FeatureVector]:
        layout = self._build_layout(dataset)
        if layout != self.layout_:
            raise SchemaError("dataset produces a different feature layout than the fitted one")
        raw = self._raw_matrix(dataset)
        norm = self._standardize(raw)
        ids = dataset.paper_ids()
        return {
            pid: FeatureVector(paper_id=pid, values=norm[i], layout=self.layout_)
            for i, pid in enumerate(ids)
        }

    # internal passes

    def _build_layout(self, dataset: Dataset) -> FeatureLayout:
        cfg = self._config()
        n_scores = 1 + len(dataset.scale.aspect_names)
        score_names = ["overall", *dataset.scale.aspect_names]
        blocks: list[tuple[str, int]] = []
        columns: list[str] = []
        for block in cfg.blocks:
            if block == "score-stats":
                dim = 4 * n_scores
                labels = [f"stat:{s}:{m}" for s in score_names for m in ("mean", "sd", "min", "max")]
            elif block == "score-concat":
                dim = self.max_reviews_ * n_scores
                labels = [f"concat:{slot}:{s}" for slot in range(self.max_reviews_) for s in score_names]
            else:
                idx = _text_block_columns(self.text_features, block, cfg.embed_sections)
                if not idx:
                    raise SchemaError(f"text-feature table has no columns for block {block!r}")
                dim = len(idx)
                labels = [self.text_features.columns[i] for i in idx]
            blocks.append((block, dim))
            columns.extend(labels)
        return FeatureLayout(blocks=tuple(blocks), columns=tuple(columns))

    def _raw_matrix(self, dataset: Dataset) -> np.ndarray:
        cfg = self._config()
        ids = dataset.paper_ids()
        parts: list[np.ndarray] = []
        for block in cfg.blocks:
            if block == "score-stats":
                parts.append(np.vstack([score_stat_features(dataset, pid) for pid in ids]))
            elif block == "score-concat":
                parts.append(
                    np.vstack([score_concat_features(dataset, pid, self.max_reviews_) for pid in ids])
                )
            else:
                idx = _text_block_columns(self.text_features, block, cfg.embed_sections)
                parts.append(np.vstack([self.text_features.row(pid)[idx] for pid in ids]))
        return np.hstack(parts)

    def _standardize(self, raw: np.ndarray) -> np.ndarray:
        cfg = self._config()
        out = raw.copy()
        for block, _ in self.layout_.blocks:
            if not cfg.is_standardized(block):
                continue
            sl = self.layout_.block_slice(block)
            # constant-at-fit columns have scale 1 and come out exactly 0
            out[:, sl] = (raw[:, sl] - self.mean_[sl]) / self.scale_[sl]
        return out


def assemble(
    dataset: Dataset,
    config: Optional[FeatureConfig] = None,
    text_features: Optional[TextFeatureTable] = None,
) -> dict[str, FeatureVector]:
    """One-shot assembly: fit the assembler on the dataset and emit vectors."""
    return FeatureAssembler(config=config, text_features=text_features).fit_transform(dataset)
