"""textfeat: review-text features for paper ranking, extracted offline.

Reads the reviews JSONL interchange file, splits section texts into
sentences, runs a pluggable sentence-embedding backend and an optional
discourse classifier, and writes the text-feature CSV contract:
``paper_id``, ``discourse:<label>`` proportions, ``embed:<section>:<i>``
per-review-mean section embeddings averaged across reviews,
``embedmean:<section>:<i>`` sentence-pooled section means and
``related:first_sentence_cosine``.
"""

__version__ = "0.1.0"

from .backends import (
    BackendUnavailable,
    MockDiscourseClassifier,
    MockEmbedding,
    load_discourse_backend,
    load_embedding_backend,
)
from .extract import (
    AMPERE_LABELS,
    PaperFeatures,
    discourse_distribution,
    embed_sections,
    extract_table,
    read_reviews,
    write_feature_csv,
)
from .sentences import split_sentences
