"""Seeded synthetic peer-review generation for desk-scale testing.

Papers get a latent quality drawn from a standard normal; referees carry a
calibration offset and per-score noise; integer scores arise from a linear
map onto the declared scale followed by rounding and clipping.  Acceptance
takes the top quota by a noisy committee score and citation counts are
log-linear in quality, so only ordinal structure survives into the gold
standards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import ACL_LIKE_SCALE, Dataset, Paper, Review, ScaleSpec
from .errors import ConfigError

_FILLER_WORDS = ("solid", "unclear", "novel", "limited", "thorough", "terse")


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs of the generator; noise and bias are in score points.

    ``bias_spread`` is the full width of the uniform interval the per-referee
    calibration offset is drawn from, e.g. 2.0 yields offsets in [-1, 1].
    """

    n_papers: int
    n_referees: int
    reviews_per_paper: int
    bias_spread: float = 0.0
    score_noise: float = 0.0
    acceptance_quota: float = 0.25
    citation_noise: float = 0.5
    citation_scale: float = 1.0
    committee_noise: float = 0.25
    n_tracks: int = 1
    section_sentences: int = 0
    confidence_bias_weight: float = 0.0
    scale: ScaleSpec = field(default_factory=lambda: ACL_LIKE_SCALE)

    def __post_init__(self):
        if min(self.n_papers, self.n_referees, self.reviews_per_paper, self.n_tracks) < 1:
            raise ConfigError("paper, referee, review and track counts must be positive")
        if self.reviews_per_paper > self.n_referees:
            raise ConfigError(
                f"cannot assign {self.reviews_per_paper} distinct referees per paper "
                f"with only {self.n_referees} referees"
            )
        if not 0.0 < self.acceptance_quota <= 1.0:
            raise ConfigError("acceptance_quota must be in (0, 1]")
        if self.bias_spread < 0 or self.score_noise < 0 or self.citation_noise < 0 or self.committee_noise < 0:
            raise ConfigError("spread and noise parameters must be non-negative")


def _linear_score(raw: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Map a roughly standard-normal signal onto [lo, hi]: centre at the scale
    midpoint, one sigma = a quarter of the range, then round and clip."""
    mid = (lo + hi) / 2.0
    slope = (hi - lo) / 4.0
    return np.clip(np.rint(mid + slope * raw), lo, hi)


def _sections(rng: np.random.Generator, n_sentences: int) -> dict[str, str]:
    if n_sentences <= 0:
        return {}
    names = ("summary_contributions", "strengths", "weaknesses")
    out = {}
    for name in names:
        words = rng.choice(_FILLER_WORDS, size=3 * n_sentences)
        sentences = [
            "The work is " + " and ".join(words[3 * i : 3 * i + 3]) + "."
            for i in range(n_sentences)
        ]
        out[name] = " ".join(sentences)
    return out


def generate_synthetic(cfg: SyntheticConfig, seed: int) -> tuple[Dataset, dict[str, float]]:
    """Generate a dataset and the true per-paper utilities it was built from."""
    rng = np.random.default_rng(seed)
    scale = cfg.scale
    n = cfg.n_papers

    width = len(str(max(n, cfg.n_referees)))
    paper_ids = [f"p{i:0{width}d}" for i in range(1, n + 1)]
    referee_ids = [f"e{i:0{width}d}" for i in range(1, cfg.n_referees + 1)]

    utilities = rng.standard_normal(n)
    referee_bias = rng.uniform(-cfg.bias_spread / 2.0, cfg.bias_spread / 2.0, size=cfg.n_referees)
    aspect_names = scale.aspect_names
    aspect_weight = rng.uniform(0.6, 1.0, size=len(aspect_names))
    # confidence_bias_weight > 0 makes self-reported confidence informative:
    # heavily miscalibrated referees report lower confidence
    referee_confidence = np.clip(
        np.rint(
            5.0
            - cfg.confidence_bias_weight * np.abs(referee_bias)
            + rng.normal(0.0, 0.25, size=cfg.n_referees)
        ),
        1,
        5,
    )

    # Cyclic assignment over shuffled orders: distinct referees per paper,
    # balanced portfolios whose membership is random.
    paper_order = rng.permutation(n)
    referee_order = rng.permutation(cfg.n_referees)

    reviews: dict[str, Review] = {}
    counter = 0
    for slot, p_idx in enumerate(paper_order):
        u = utilities[p_idx]
        for j in range(cfg.reviews_per_paper):
            e_idx = referee_order[(slot * cfg.reviews_per_paper + j) % cfg.n_referees]
            counter += 1
            overall_raw = u + referee_bias[e_idx] + rng.normal(0.0, cfg.score_noise)
            overall = _linear_score(np.asarray(overall_raw), scale.overall_min, scale.overall_max)
            aspects = {}
            for a_idx, name in enumerate(aspect_names):
                lo, hi = scale.aspect_bounds(name)
                raw = aspect_weight[a_idx] * u + rng.normal(0.0, cfg.score_noise)
                aspects[name] = float(_linear_score(np.asarray(raw), lo, hi))
            if cfg.confidence_bias_weight > 0:
                confidence = float(referee_confidence[e_idx])
            else:
                confidence = float(rng.integers(1, 6))
            reviews[f"r{counter:06d}"] = Review(
                review_id=f"r{counter:06d}",
                paper_id=paper_ids[p_idx],
                referee_id=referee_ids[e_idx],
                overall_score=float(overall),
                aspect_scores=aspects,
                confidence=confidence,
                sections=_sections(rng, cfg.section_sentences),
            )

    committee = utilities + rng.normal(0.0, cfg.committee_noise, size=n)
    n_accept = int(round(cfg.acceptance_quota * n))
    accepted_idx = set(np.argsort(-committee, kind="stable")[:n_accept].tolist())

    log_citations = cfg.citation_scale * utilities + rng.normal(0.0, cfg.citation_noise, size=n)

    papers: dict[str, Paper] = {}
    for i, pid in enumerate(paper_ids):
        accepted = i in accepted_idx
        citations = int(round(float(np.exp(log_citations[i])))) if accepted else None
        papers[pid] = Paper(
            paper_id=pid,
            track=f"t{(i % cfg.n_tracks) + 1}",
            accepted=accepted,
            citation_count=citations,
        )

    dataset = Dataset(papers=papers, reviews=reviews, scale=scale)
    true_utilities = {pid: float(utilities[i]) for i, pid in enumerate(paper_ids)}
    return dataset, true_utilities


def synthetic_text_features(
    dataset: Dataset,
    true_utilities: dict[str, float],
    dim: int = 8,
    noise: float = 0.5,
    sections: tuple[str, ...] = ("summary_contributions", "strengths", "weaknesses"),
    discourse_labels: tuple[str, ...] = ("evaluation", "request", "fact", "reference", "quote", "nonarg"),
    seed: int = 0,
):
    """Proxy text-feature table whose embedding blocks carry a noisy copy of
    the true utility; lets the full feature pipeline run without any neural
    extraction.  ``noise`` is the sigma of the utility corruption inside the
    embeddings."""
    from .features import TextFeatureTable, text_feature_columns

    rng = np.random.default_rng(seed)
    paper_ids = dataset.paper_ids()
    directions = {s: _unit_vector(rng, dim) for s in sections}

    columns = text_feature_columns(discourse_labels, sections, dim)
    rows = np.empty((len(paper_ids), len(columns)), dtype=float)
    for r, pid in enumerate(paper_ids):
        u = true_utilities[pid]
        values: list[float] = []
        values.extend(rng.dirichlet(np.ones(len(discourse_labels))).tolist())
        for s in sections:
            signal = u + rng.normal(0.0, noise)
            vec = directions[s] * signal + rng.normal(0.0, 0.1, size=dim)
            values.extend(vec.tolist())
        for s in sections:
            signal = u + rng.normal(0.0, noise)
            vec = directions[s] * signal + rng.normal(0.0, 0.1, size=dim)
            values.extend(vec.tolist())
        values.append(float(np.clip(1.0 - abs(rng.normal(0.0, 0.1)), -1.0, 1.0)))
        rows[r] = values
    return TextFeatureTable(paper_ids=list(paper_ids), columns=columns, values=rows)


def _unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)
