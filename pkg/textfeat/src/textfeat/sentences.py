"""Deterministic sentence splitting for review sections."""

import re

_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Split on ./!/? followed by whitespace; drops empty fragments.

    Intentionally simple and dependency-free: the extraction contract only
    needs a deterministic tokenization, not linguistic perfection.
    """
    if not text or not text.strip():
        return []
    parts = _BOUNDARY.split(text.strip())
    return [p.strip() for p in parts if p.strip()]
