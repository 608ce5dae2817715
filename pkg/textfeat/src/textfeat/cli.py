"""Command line: reviews JSONL in, text-feature CSV out."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .backends import BackendUnavailable, load_discourse_backend, load_embedding_backend
from .extract import extract_table, read_reviews, write_feature_csv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="textfeat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"textfeat {__version__}")
    parser.add_argument("--reviews", required=True, help="reviews JSONL file")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--model", help="sentence-transformers model for embeddings")
    parser.add_argument("--discourse-model", help="transformers sentence classifier; omit to skip discourse columns")
    parser.add_argument("--mock", action="store_true",
                        help="use the deterministic mock backends (testing, offline runs)")
    parser.add_argument("--mock-dim", type=int, default=8, help="embedding width of the mock backend")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        embedder = load_embedding_backend(args.model, args.mock, args.mock_dim)
        classifier = load_discourse_backend(args.discourse_model, args.mock)
    except BackendUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if classifier is None:
        print("note: no discourse model configured; emitting file without discourse columns",
              file=sys.stderr)
    try:
        by_paper = read_reviews(args.reviews)
        table = extract_table(by_paper, embedder, classifier)
        write_feature_csv(table, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({len(table.paper_ids)} papers, {len(table.columns)} columns)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
