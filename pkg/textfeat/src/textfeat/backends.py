"""Pluggable embedding and discourse-classifier backends.

The mock backends are deterministic and hand-computable so tests can pin
exact values: the mock embedder counts alphabet letters, the mock classifier
applies a fixed keyword rule list.  Real backends wrap sentence-transformers
and a transformers text-classification pipeline; they are loaded lazily and
failures raise :class:`BackendUnavailable` with instructions.
"""

from __future__ import annotations

import string
from typing import Protocol, Sequence

import numpy as np


class BackendUnavailable(RuntimeError):
    """A requested neural backend cannot be loaded."""


class EmbeddingBackend(Protocol):
    dim: int

    def encode(self, sentences: Sequence[str]) -> np.ndarray: ...


class DiscourseBackend(Protocol):
    labels: tuple[str, ...]

    def classify(self, sentences: Sequence[str]) -> list[str]: ...


class MockEmbedding:
    """Hand-computable embeddings: component i counts the i-th alphabet
    letter in the lowercased sentence."""

    def __init__(self, dim: int = 8):
        self.dim = dim
        self._letters = string.ascii_lowercase[:dim]

    def encode(self, sentences: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(sentences), self.dim))
        for row, sentence in enumerate(sentences):
            lowered = sentence.lower()
            for col, letter in enumerate(self._letters):
                out[row, col] = lowered.count(letter)
        return out


#: AMPERE-style sentence-level discourse labels (nonarg = non-argumentative)
MOCK_LABELS = ("evaluation", "request", "fact", "reference", "quote", "nonarg")


class MockDiscourseClassifier:
    """Fixed keyword rules, first match wins (documented for hand counts):

    1. '?' anywhere, or 'please'/'should'        -> request
    2. double quote character                    -> quote
    3. 'table'/'figure'/'section'                -> reference
    4. 'good'/'weak'/'unclear'/'solid'/'novel'   -> evaluation
    5. 'we '/'method'/'uses'                     -> fact
    6. otherwise                                 -> nonarg
    """

    labels = MOCK_LABELS

    def classify(self, sentences: Sequence[str]) -> list[str]:
        out = []
        for sentence in sentences:
            s = sentence.lower()
            if "?" in s or "please" in s or "should" in s:
                out.append("request")
            elif '"' in s:
                out.append("quote")
            elif "table" in s or "figure" in s or "section" in s:
                out.append("reference")
            elif any(w in s for w in ("good", "weak", "unclear", "solid", "novel")):
                out.append("evaluation")
            elif "we " in s or "method" in s or "uses" in s:
                out.append("fact")
            else:
                out.append("nonarg")
        return out


class SbertEmbedding:
    """sentence-transformers backend."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise BackendUnavailable(
                "sentence-transformers is not installed; run "
                "'pip install sentence-transformers' or use --mock"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise BackendUnavailable(
                f"could not load sentence-transformers model {model_name!r}: {exc}; "
                "download the model or use --mock"
            ) from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, sentences: Sequence[str]) -> np.ndarray:
        if not sentences:
            return np.zeros((0, self.dim))
        return np.asarray(self._model.encode(list(sentences), show_progress_bar=False))


class TransformersDiscourseClassifier:
    """transformers text-classification pipeline over review sentences."""

    def __init__(self, model_name: str):
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise BackendUnavailable(
                "transformers is not installed; run 'pip install transformers' or use --mock"
            ) from exc
        try:
            self._pipe = pipeline("text-classification", model=model_name)
        except Exception as exc:
            raise BackendUnavailable(
                f"could not load discourse model {model_name!r}: {exc}; "
                "provide a local sentence-classification model or use --mock"
            ) from exc
        labels = getattr(self._pipe.model.config, "id2label", None)
        self.labels = tuple(sorted(labels.values())) if labels else MOCK_LABELS

    def classify(self, sentences: Sequence[str]) -> list[str]:
        if not sentences:
            return []
        return [r["label"] for r in self._pipe(list(sentences), truncation=True)]


def load_embedding_backend(model: str | None, mock: bool, mock_dim: int = 8) -> EmbeddingBackend:
    if mock or model is None:
        return MockEmbedding(dim=mock_dim)
    return SbertEmbedding(model)


def load_discourse_backend(model: str | None, mock: bool) -> DiscourseBackend | None:
    """None means no classifier: the CSV is emitted without discourse columns."""
    if mock:
        return MockDiscourseClassifier()
    if model is None:
        return None
    return TransformersDiscourseClassifier(model)
