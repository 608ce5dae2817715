"""Ranking metrics: AUROC, precision-recall AUC, Spearman correlation.

All three handle tied scores explicitly (0.5 concordance credit for AUROC,
grouped thresholds for PRAUC, average ranks for Spearman).  Degenerate inputs
(single-class labels, constant vectors) yield ``None`` rather than a number.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata


def auroc(labels: Sequence[bool], scores: Sequence[float]) -> Optional[float]:
    """Probability a positive outranks a negative, ties counted half.

    Computed from average ranks (Mann-Whitney form).  Returns None when only
    one class is present.
    """
    y = np.asarray(labels, dtype=bool)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    n_neg = int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(s)
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def prauc(labels: Sequence[bool], scores: Sequence[float]) -> Optional[float]:
    """Area under the precision-recall curve (average precision).

    Thresholds sweep the distinct score values from high to low; tied scores
    enter together.  AP = sum over thresholds of (recall step) * precision.
    Returns None when only one class is present.
    """
    y = np.asarray(labels, dtype=bool)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        return None
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    # last index of each distinct-score group
    boundary = np.nonzero(np.diff(s_sorted))[0]
    group_ends = np.concatenate([boundary, [len(s_sorted) - 1]])
    tp = np.cumsum(y_sorted)[group_ends].astype(float)
    n_seen = group_ends + 1.0
    precision = tp / n_seen
    tp_prev = np.concatenate([[0.0], tp[:-1]])
    return float(np.sum((tp - tp_prev) / n_pos * precision))


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Spearman rho with average-rank tie handling.

    Returns None for fewer than two points or when either input is constant.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if len(xa) < 2:
        return None
    rx = rankdata(xa)
    ry = rankdata(ya)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = np.sqrt(np.sum(rx * rx) * np.sum(ry * ry))
    if denom == 0.0:
        return None
    return float(np.sum(rx * ry) / denom)
