"""Consensus ranking: order papers to violate as few precedence pairs as possible.

Both solvers consume the strict-pair multiset (ties must be filtered out
first, see ``filter_pairs(..., "drop-ties")``) reduced to a violation-count
matrix.  ``dcon`` is an exact depth-first branch-and-bound over ranking
prefixes with an admissible pairwise-minimum bound and an explicit time
budget; ``ncon`` is best-improvement single-item insertion search with
seeded restarts.  Papers that appear in no comparison cannot be placed by
the objective; they are appended after the ranked papers and flagged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .preferences import PreferencePair, STRICT
from .ranking import RankingResult

OPTIMAL = "optimal"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class ConsensusConfig:
    time_budget: float = 300.0
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.time_budget <= 0 or self.restarts < 1:
            raise ConfigError("time_budget and restarts must be positive")


class ViolationMatrix:
    """counts[i, j] = number of strict pairs asserting paper i beats paper j."""

    def __init__(self, paper_ids: Sequence[str], counts: np.ndarray):
        self.paper_ids = list(paper_ids)
        self.index = {pid: i for i, pid in enumerate(self.paper_ids)}
        self.counts = counts

    @classmethod
    def from_pairs(cls, pairs: Iterable[PreferencePair]) -> "ViolationMatrix":
        pairs = list(pairs)
        if any(p.relation != STRICT for p in pairs):
            raise ConfigError("consensus rankers take strict pairs only; apply the drop-ties filter")
        ids = sorted({pid for p in pairs for pid in (p.better, p.worse)})
        index = {pid: i for i, pid in enumerate(ids)}
        counts = np.zeros((len(ids), len(ids)), dtype=np.int64)
        for p in pairs:
            counts[index[p.better], index[p.worse]] += 1
        return cls(ids, counts)

    @property
    def total_pairs(self) -> int:
        return int(self.counts.sum())


def violations(order: Sequence[str], vm: ViolationMatrix) -> int:
    """Violated pair count of a total order (first element ranked best)."""
    if sorted(order) != sorted(vm.paper_ids):
        raise ValueError("order is not a permutation of the papers in the violation matrix")
    idx = np.array([vm.index[pid] for pid in order], dtype=np.intp)
    sub = vm.counts[np.ix_(idx, idx)]
    return int(np.tril(sub, -1).sum())


def _net_wins_order(counts: np.ndarray) -> list[int]:
    net = counts.sum(axis=1) - counts.sum(axis=0)
    return sorted(range(counts.shape[0]), key=lambda i: (-net[i], i))


def _insertion_descent(order: list[int], counts: np.ndarray) -> tuple[list[int], int]:
    """Best-improvement insertion moves until a local optimum; cost never rises."""
    order = list(order)
    cost = _order_cost(order, counts)
    n = len(order)
    while True:
        best_delta = 0
        best_move = None
        for p in range(n):
            x = order[p]
            # moving x earlier: walk left accumulating swap deltas
            delta = 0
            for q in range(p - 1, -1, -1):
                o = order[q]
                delta += counts[o, x] - counts[x, o]
                if delta < best_delta:
                    best_delta = delta
                    best_move = (p, q)
            # moving x later
            delta = 0
            for q in range(p + 1, n):
                o = order[q]
                delta += counts[x, o] - counts[o, x]
                if delta < best_delta:
                    best_delta = delta
                    best_move = (p, q)
        if best_move is None:
            return order, cost
        p, q = best_move
        x = order.pop(p)
        order.insert(q, x)
        cost += best_delta


def _order_cost(order: Sequence[int], counts: np.ndarray) -> int:
    idx = np.asarray(order, dtype=np.intp)
    sub = counts[np.ix_(idx, idx)]
    return int(np.tril(sub, -1).sum())


def _result_from_order(
    method: str,
    vm: ViolationMatrix,
    order_idx: Sequence[int],
    papers: Optional[Iterable[str]],
    config: dict,
    status: Optional[str],
) -> RankingResult:
    ranked = [vm.paper_ids[i] for i in order_idx]
    extras = sorted(set(papers or ()) - set(ranked))
    full = ranked + extras
    n = len(full)
    utilities = {pid: float(n - rank) for rank, pid in enumerate(full, start=1)}
    flags = {pid: "uncompared" for pid in extras}
    return RankingResult(
        method=method,
        utilities=utilities,
        ranks={pid: i + 1 for i, pid in enumerate(full)},
        config=config,
        status=status,
        flags=flags,
    )


class BranchAndBoundConsensus:
    """Exact Kemeny consensus within a time budget (dcon).

    fit() explores ranking prefixes depth-first, children in descending
    net-wins order; a node's bound is the prefix cost plus the sum over
    undecided pairs of the smaller direction count.  Attributes after fit:
    ``ranking_`` (index order), ``violations_``, ``status_``.
    """

    def __init__(self, time_budget: float = 300.0, seed: int = 0):
        self.time_budget = time_budget
        self.seed = seed

    def fit(self, vm: ViolationMatrix) -> "BranchAndBoundConsensus":
        counts = vm.counts
        n = counts.shape[0]
        if n == 0:
            self.ranking_, self.violations_, self.status_ = [], 0, OPTIMAL
            self.nodes_expanded_ = 0
            return self

        deadline = time.monotonic() + self.time_budget
        minpair = np.minimum(counts, counts.T)

        warm, warm_cost = _insertion_descent(_net_wins_order(counts), counts)
        self.ranking_, self.violations_ = warm, warm_cost
        heuristic = _net_wins_order(counts)

        lb_root = int(np.triu(minpair, 1).sum())
        remaining = np.ones(n, dtype=bool)
        prefix: list[int] = []
        self._expansions = 0
        self._aborted = False

        def search(cost: int, lb: int) -> None:
            self._expansions += 1
            if self._expansions % 2048 == 0 and time.monotonic() > deadline:
                self._aborted = True
            if self._aborted:
                return
            if len(prefix) == n:
                if cost < self.violations_:
                    self.ranking_ = list(prefix)
                    self.violations_ = cost
                return
            for x in heuristic:
                if not remaining[x]:
                    continue
                added = int(counts[remaining, x].sum())
                lb_child = lb - int(minpair[x, remaining].sum())
                child_cost = cost + added
                if child_cost + lb_child >= self.violations_:
                    continue
                remaining[x] = False
                prefix.append(x)
                search(child_cost, lb_child)
                prefix.pop()
                remaining[x] = True
                if self._aborted:
                    return

        search(0, lb_root)
        self.status_ = BUDGET_EXHAUSTED if self._aborted else OPTIMAL
        self.nodes_expanded_ = self._expansions
        return self


class NeighborhoodConsensus:
    """Insertion local search with seeded restarts (ncon)."""

    def __init__(self, restarts: int = 8, time_budget: float = 300.0, seed: int = 0):
        self.restarts = restarts
        self.time_budget = time_budget
        self.seed = seed

    def fit(self, vm: ViolationMatrix) -> "NeighborhoodConsensus":
        counts = vm.counts
        n = counts.shape[0]
        if n == 0:
            self.ranking_, self.violations_ = [], 0
            return self
        deadline = time.monotonic() + self.time_budget
        rng = np.random.default_rng(self.seed)
        best_order, best_cost = _insertion_descent(_net_wins_order(counts), counts)
        for _ in range(1, self.restarts):
            if time.monotonic() > deadline:
                break
            start = rng.permutation(n).tolist()
            order, cost = _insertion_descent(start, counts)
            if cost < best_cost:
                best_order, best_cost = order, cost
        self.ranking_, self.violations_ = best_order, best_cost
        return self


def dcon(
    pairs: Iterable[PreferencePair],
    cfg: ConsensusConfig,
    papers: Optional[Iterable[str]] = None,
) -> tuple[RankingResult, str]:
    """Exact consensus ranking; returns (result, "optimal" | "budget-exhausted")."""
    vm = ViolationMatrix.from_pairs(pairs)
    solver = BranchAndBoundConsensus(time_budget=cfg.time_budget, seed=cfg.seed).fit(vm)
    config = {
        "method": "dcon",
        "time_budget": cfg.time_budget,
        "seed": cfg.seed,
        "nodes_expanded": solver.nodes_expanded_,
        "violations": solver.violations_,
    }
    result = _result_from_order("dcon", vm, solver.ranking_, papers, config, solver.status_)
    return result, solver.status_


def ncon(
    pairs: Iterable[PreferencePair],
    cfg: ConsensusConfig,
    papers: Optional[Iterable[str]] = None,
) -> RankingResult:
    """Neighborhood-search consensus ranking."""
    vm = ViolationMatrix.from_pairs(pairs)
    solver = NeighborhoodConsensus(restarts=cfg.restarts, time_budget=cfg.time_budget, seed=cfg.seed).fit(vm)
    config = {
        "method": "ncon",
        "restarts": cfg.restarts,
        "time_budget": cfg.time_budget,
        "seed": cfg.seed,
    }
    return _result_from_order("ncon", vm, solver.ranking_, papers, config, status=None)
