"""Common ranking result type and its CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional


@dataclass(frozen=True)
class RankingResult:
    """Per-paper utilities plus the total order they induce.

    Ranks are 1-based (1 = best), assigned by descending utility with ties
    broken by ascending paper_id.  ``flags`` marks papers with caveats (e.g.
    consensus rankers tag papers that appeared in no comparison) and
    ``status`` carries a solver-level outcome.
    """

    method: str
    utilities: Mapping[str, float]
    ranks: Mapping[str, int]
    config: Mapping = field(default_factory=dict)
    status: Optional[str] = None
    flags: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_utilities(
        cls,
        method: str,
        utilities: Mapping[str, float],
        config: Optional[Mapping] = None,
        status: Optional[str] = None,
        flags: Optional[Mapping[str, str]] = None,
    ) -> "RankingResult":
        order = sorted(utilities, key=lambda pid: (-utilities[pid], pid))
        ranks = {pid: i + 1 for i, pid in enumerate(order)}
        return cls(
            method=method,
            utilities=dict(utilities),
            ranks=ranks,
            config=dict(config or {}),
            status=status,
            flags=dict(flags or {}),
        )

    def ordering(self) -> list[str]:
        """Paper ids from best to worst."""
        return sorted(self.ranks, key=self.ranks.__getitem__)

    def utility_vector(self, paper_ids) -> list[float]:
        return [self.utilities[pid] for pid in paper_ids]


def write_ranking(result: RankingResult, path: str | Path) -> None:
    extra_cols = []
    if result.flags:
        extra_cols.append("flag")
    if result.status is not None:
        extra_cols.append("solver_status")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["paper_id", "utility", "rank", *extra_cols])
        for pid in result.ordering():
            row = [pid, f"{result.utilities[pid]:.17g}", result.ranks[pid]]
            if "flag" in extra_cols:
                row.append(result.flags.get(pid, "ranked"))
            if "solver_status" in extra_cols:
                row.append(result.status)
            writer.writerow(row)
