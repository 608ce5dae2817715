"""Stationary kernels and the jittered Cholesky used by the GP ranker."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cholesky
from scipy.spatial.distance import cdist

from .errors import ComputationError

KERNELS = ("matern32", "matern52", "rbf")

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


def _apply(kind: str, r: np.ndarray, length_scale: float) -> np.ndarray:
    t = r / length_scale
    if kind == "matern32":
        return (1.0 + SQRT3 * t) * np.exp(-SQRT3 * t)
    if kind == "matern52":
        return (1.0 + SQRT5 * t + 5.0 * t * t / 3.0) * np.exp(-SQRT5 * t)
    if kind == "rbf":
        return np.exp(-0.5 * t * t)
    raise ValueError(f"unknown kernel {kind!r}; expected one of {KERNELS}")


def kernel_eval(kind: str, a, b, length_scale: float = 1.0) -> float:
    """k(a, b) for a single vector pair; unit variance, k(a, a) = 1."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    r = float(np.linalg.norm(a - b))
    return float(_apply(kind, np.asarray(r), length_scale))


def gram(kind: str, X, Y=None, length_scale: float = 1.0) -> np.ndarray:
    """Gram matrix k(X, Y); symmetric PSD (up to round-off) when Y is X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    r = cdist(X, Y, metric="euclidean")
    return _apply(kind, r, length_scale)


def rowwise(kind: str, A, B, length_scale: float = 1.0) -> np.ndarray:
    """k(A[i], B[i]) for each row i."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    r = np.linalg.norm(A - B, axis=1)
    return _apply(kind, r, length_scale)


def jittered_cholesky(K: np.ndarray, jitter_start: float = 1e-6, jitter_max: float = 1e-2):
    """Lower Cholesky factor, escalating diagonal jitter on failure.

    Returns (L, jitter_used); jitter 0.0 means the plain factorization
    succeeded.  Raises ComputationError once the ladder tops out.
    """
    try:
        return cholesky(K, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = jitter_start
    eye = np.eye(K.shape[0])
    while jitter <= jitter_max:
        try:
            return cholesky(K + jitter * eye, lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise ComputationError(
        f"Cholesky failed with jitter up to {jitter_max:g}; kernel matrix is degenerate "
        "(duplicate inducing points?)"
    )
