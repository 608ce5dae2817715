"""Krippendorff's alpha with an ordinal metric over overall scores.

Papers are the items, referees the coders; papers with a single review carry
no agreement information and drop out of the coincidence matrix.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .data import Dataset


def krippendorff_alpha_ordinal(values_per_item: Sequence[Sequence[float]]) -> Optional[float]:
    """Alpha from raw per-item value lists (missing cells simply absent).

    Uses the coincidence-matrix formulation: each ordered value pair within an
    item contributes 1/(m_u - 1); the ordinal squared distance between
    categories c <= k is (sum of marginals of categories between them minus
    half the two endpoint marginals) squared.  Returns None when undefined
    (fewer than two pairable values or zero expected disagreement).
    """
    items = [list(vals) for vals in values_per_item if len(vals) >= 2]
    if not items:
        return None
    categories = sorted({v for vals in items for v in vals})
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)

    coincidence = np.zeros((k, k))
    for vals in items:
        m = len(vals)
        for a in range(m):
            for b in range(m):
                if a != b:
                    coincidence[index[vals[a]], index[vals[b]]] += 1.0 / (m - 1)

    marginals = coincidence.sum(axis=1)
    n = marginals.sum()
    if n <= 1:
        return None

    cumulative = np.cumsum(marginals)
    delta_sq = np.zeros((k, k))
    for c in range(k):
        for d in range(c + 1, k):
            between = cumulative[d] - (cumulative[c - 1] if c > 0 else 0.0)
            diff = between - (marginals[c] + marginals[d]) / 2.0
            delta_sq[c, d] = delta_sq[d, c] = diff * diff

    observed = float(np.sum(coincidence * delta_sq) / n)
    expected = float(np.sum(np.outer(marginals, marginals) * delta_sq) / (n * (n - 1)))
    if expected == 0.0:
        return None
    return 1.0 - observed / expected


def dataset_alpha(dataset: Dataset) -> Optional[float]:
    """Alpha over overall scores of multiply-reviewed papers."""
    groups = dataset.by_paper()
    return krippendorff_alpha_ordinal(
        [[r.overall_score for r in reviews] for reviews in groups.values()]
    )
