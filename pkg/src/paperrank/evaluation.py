"""Evaluation framework: effectiveness against acceptance labels and citation
rankings, fairness via bias/noise perturbation scenarios, efficiency via
review sub-sampling, stratified dev/test splits and multi-run aggregation.

Citation counts only exist for accepted papers, so Spearman correlations are
computed over that subset; per-track normalized citations (ncc) divide each
count by its track's total.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .baselines import BASELINE_METHODS, BaselineSpec, rank_baseline
from .consensus import ConsensusConfig, dcon, ncon
from .data import Dataset, Review
from .errors import ComputationError, ConfigError, CoverageError, PaperRankError
from .features import FeatureConfig, TextFeatureTable, assemble, feature_config
from .gppl import GpplConfig, GpplRanker
from .metrics import auroc, prauc, spearman
from .preferences import preference_pairs, filter_pairs
from .ranking import RankingResult

PERTURBATION_KINDS = ("referee-noise", "commensuration", "review-subsample")

METRIC_KEYS = ("auroc", "prauc", "rho_raw", "rho_norm")


# -- gold standard -----------------------------------------------------------


@dataclass(frozen=True)
class GoldStandard:
    acceptance: Mapping[str, bool]
    citations_raw: Mapping[str, int]
    citations_norm: Mapping[str, float]
    tracks: Mapping[str, str]

    def restrict(self, paper_ids: Iterable[str]) -> "GoldStandard":
        keep = set(paper_ids)
        return GoldStandard(
            acceptance={p: v for p, v in self.acceptance.items() if p in keep},
            citations_raw={p: v for p, v in self.citations_raw.items() if p in keep},
            citations_norm={p: v for p, v in self.citations_norm.items() if p in keep},
            tracks={p: v for p, v in self.tracks.items() if p in keep},
        )


def build_gold(dataset: Dataset) -> GoldStandard:
    """Extract acceptance labels, citation counts and per-track normalized
    citation values from the paper records."""
    acceptance = {p.paper_id: p.accepted for p in dataset.papers.values() if p.accepted is not None}
    citations = {
        p.paper_id: p.citation_count
        for p in dataset.papers.values()
        if p.accepted and p.citation_count is not None
    }
    tracks = {p.paper_id: p.track for p in dataset.papers.values()}
    totals: dict[str, int] = {}
    for pid, cc in citations.items():
        totals[tracks[pid]] = totals.get(tracks[pid], 0) + cc
    norm = {}
    for pid, cc in citations.items():
        total = totals[tracks[pid]]
        if total > 0:
            norm[pid] = cc / total
    return GoldStandard(acceptance=acceptance, citations_raw=citations, citations_norm=norm, tracks=tracks)


def ncc(gold: GoldStandard, paper_id: str) -> float:
    """Citation count divided by the total citations of the paper's track."""
    if paper_id not in gold.citations_raw:
        raise KeyError(f"paper {paper_id!r} has no citation data")
    if paper_id not in gold.citations_norm:
        raise ComputationError(
            f"track {gold.tracks[paper_id]!r} has zero total citations; ncc undefined"
        )
    return gold.citations_norm[paper_id]


# -- effectiveness -----------------------------------------------------------


@dataclass(frozen=True)
class EffectivenessMetrics:
    auroc: Optional[float]
    prauc: Optional[float]
    rho_raw: Optional[float]
    rho_norm: Optional[float]

    def as_dict(self) -> dict[str, Optional[float]]:
        return {
            "auroc": self.auroc,
            "prauc": self.prauc,
            "rho_raw": self.rho_raw,
            "rho_norm": self.rho_norm,
        }


def effectiveness(result: RankingResult, gold: GoldStandard) -> EffectivenessMetrics:
    """AUROC/PRAUC of utilities as acceptance scores, Spearman against raw and
    track-normalized citation rankings (accepted papers only)."""
    labeled = sorted(gold.acceptance)
    missing = [p for p in labeled if p not in result.utilities]
    if missing:
        raise CoverageError(f"ranking does not cover evaluated papers: {missing[:5]}")
    labels = [gold.acceptance[p] for p in labeled]
    scores = [result.utilities[p] for p in labeled]

    cited = sorted(gold.citations_raw)
    rho_raw = spearman([result.utilities[p] for p in cited], [gold.citations_raw[p] for p in cited])
    normed = sorted(gold.citations_norm)
    rho_norm = spearman([result.utilities[p] for p in normed], [gold.citations_norm[p] for p in normed])
    return EffectivenessMetrics(
        auroc=auroc(labels, scores),
        prauc=prauc(labels, scores),
        rho_raw=rho_raw,
        rho_norm=rho_norm,
    )


# -- stratified split ---------------------------------------------------------


def _citation_quartiles(gold: GoldStandard) -> dict[str, int]:
    cited = sorted(gold.citations_raw, key=lambda p: (-gold.citations_raw[p], p))
    n = len(cited)
    return {p: min(3, (4 * i) // n) for i, p in enumerate(cited)} if n else {}


def split(
    dataset: Dataset, gold: GoldStandard, dev_fraction: float = 0.2, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Partition labeled papers into dev/test, stratified jointly on the
    acceptance label and the quartile of the citation ranking."""
    if not 0 < dev_fraction < 1:
        raise ConfigError("dev_fraction must be in (0, 1)")
    labeled = sorted(gold.acceptance)
    quartile = _citation_quartiles(gold)
    strata: dict[tuple, list[str]] = {}
    for pid in labeled:
        strata.setdefault((gold.acceptance[pid], quartile.get(pid, -1)), []).append(pid)

    # merge strata too small to split into the neighboring quartile
    merged = True
    while merged and len(strata) > 1:
        merged = False
        for key in sorted(strata):
            if len(strata[key]) < 2:
                accepted, q = key
                candidates = [k for k in strata if k != key and k[0] == accepted]
                if not candidates:
                    candidates = [k for k in strata if k != key]
                neighbor = min(candidates, key=lambda k: (abs(k[1] - q), k))
                warnings.warn(f"stratum {key} smaller than 2; merged into {neighbor}")
                strata[neighbor].extend(strata.pop(key))
                merged = True
                break

    rng = np.random.default_rng(seed)
    target = int(round(dev_fraction * len(labeled)))
    keys = sorted(strata)
    ideal = {k: dev_fraction * len(strata[k]) for k in keys}
    counts = {k: int(ideal[k]) for k in keys}
    shortfall = target - sum(counts.values())
    by_remainder = sorted(keys, key=lambda k: (-(ideal[k] - counts[k]), k))
    for k in by_remainder[: max(0, shortfall)]:
        counts[k] += 1

    dev: list[str] = []
    test: list[str] = []
    for k in keys:
        members = sorted(strata[k])
        order = rng.permutation(len(members))
        picked = {members[i] for i in order[: counts[k]]}
        dev.extend(sorted(picked))
        test.extend(sorted(set(members) - picked))
    return sorted(dev), sorted(test)


# -- perturbations ------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationConfig:
    """Declarative noise/bias/sub-sampling scenario.

    ``alpha`` is the affected fraction (referees for noise and commensuration,
    reviews for sub-sampling); ``sigma`` the noise level in score points;
    ``weights`` the aspect mix replacing the overall score under
    commensuration bias.
    """

    kind: str
    sigma: float = 0.0
    alpha: float = 0.3
    weights: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ConfigError(f"unknown perturbation {self.kind!r}; expected one of {PERTURBATION_KINDS}")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")
        if self.kind == "commensuration":
            if not self.weights:
                raise ConfigError("commensuration needs aspect weights")
            if any(w < 0 for w in self.weights.values()):
                raise ConfigError("aspect weights must be non-negative")
            if abs(sum(self.weights.values()) - 1.0) > 1e-9:
                raise ConfigError("aspect weights must sum to 1")


def comm_weights(preset: str, aspect_names: Sequence[str], readability_weight: float = 0.5) -> dict[str, float]:
    """The three shipped commensuration mixes: equal weights, an over-emphasis
    on readability, and discarding of the originality score."""
    names = list(aspect_names)
    k = len(names)
    if k < 2:
        raise ConfigError("commensuration presets need at least two aspects")
    if preset == "comm-eq":
        return {a: 1.0 / k for a in names}
    if preset == "comm-read":
        if "readability" not in names:
            raise ConfigError("comm-read preset needs a 'readability' aspect")
        rest = (1.0 - readability_weight) / (k - 1)
        return {a: (readability_weight if a == "readability" else rest) for a in names}
    if preset == "comm-con":
        if "originality" not in names:
            raise ConfigError("comm-con preset needs an 'originality' aspect")
        return {a: (0.0 if a == "originality" else 1.0 / (k - 1)) for a in names}
    raise ConfigError(f"unknown commensuration preset {preset!r}")


def _sample_referees(dataset: Dataset, alpha: float, rng) -> set[str]:
    referees = dataset.referee_ids()
    k = int(round(alpha * len(referees)))
    chosen = rng.choice(len(referees), size=k, replace=False)
    return {referees[i] for i in chosen}


def _noisy_score(value: float, sigma: float, lo: int, hi: int, rng) -> float:
    return float(np.clip(np.rint(value + rng.normal(0.0, sigma)), lo, hi))


def perturb(dataset: Dataset, cfg: PerturbationConfig) -> Dataset:
    """Return a perturbed copy; never emits out-of-scale scores and is the
    identity for zero-noise referee noise."""
    rng = np.random.default_rng(cfg.seed)
    scale = dataset.scale
    if cfg.kind == "review-subsample":
        return _subsample_reviews(dataset, cfg.alpha, rng)

    affected = _sample_referees(dataset, cfg.alpha, rng)
    if cfg.kind == "commensuration":
        unknown = [a for a in cfg.weights if a not in scale.aspect_names]
        if unknown:
            raise ConfigError(f"commensuration weights reference unknown aspects {unknown}")
        lo_mix = sum(w * scale.aspect_bounds(a)[0] for a, w in cfg.weights.items())
        hi_mix = sum(w * scale.aspect_bounds(a)[1] for a, w in cfg.weights.items())

    reviews: dict[str, Review] = {}
    for rid in sorted(dataset.reviews):
        review = dataset.reviews[rid]
        if review.referee_id not in affected:
            reviews[rid] = review
            continue
        if cfg.kind == "referee-noise":
            if cfg.sigma == 0.0:
                reviews[rid] = review
                continue
            overall = _noisy_score(
                review.overall_score, cfg.sigma, scale.overall_min, scale.overall_max, rng
            )
            aspects = {
                a: _noisy_score(v, cfg.sigma, *scale.aspect_bounds(a), rng=rng)
                for a, v in review.aspect_scores.items()
            }
            reviews[rid] = Review(
                review_id=review.review_id,
                paper_id=review.paper_id,
                referee_id=review.referee_id,
                overall_score=overall,
                aspect_scores=aspects,
                confidence=review.confidence,
                sections=review.sections,
            )
        else:  # commensuration
            mix = sum(w * review.aspect_scores[a] for a, w in cfg.weights.items())
            mix += rng.normal(0.0, cfg.sigma)
            if hi_mix > lo_mix:
                rescaled = scale.overall_min + (mix - lo_mix) * (
                    scale.overall_max - scale.overall_min
                ) / (hi_mix - lo_mix)
            else:
                rescaled = (scale.overall_min + scale.overall_max) / 2.0
            overall = float(np.clip(np.rint(rescaled), scale.overall_min, scale.overall_max))
            reviews[rid] = Review(
                review_id=review.review_id,
                paper_id=review.paper_id,
                referee_id=review.referee_id,
                overall_score=overall,
                aspect_scores=review.aspect_scores,
                confidence=review.confidence,
                sections=review.sections,
            )
    return Dataset(papers=dataset.papers, reviews=reviews, scale=scale)


def _subsample_reviews(dataset: Dataset, alpha: float, rng) -> Dataset:
    """Drop up to ``alpha`` of the reviews, keeping every paper reviewed."""
    review_ids = sorted(dataset.reviews)
    target = int(round(alpha * len(review_ids)))
    remaining_per_paper = {pid: len(rs) for pid, rs in dataset.by_paper().items()}
    removed: set[str] = set()
    for i in rng.permutation(len(review_ids)):
        if len(removed) >= target:
            break
        rid = review_ids[i]
        pid = dataset.reviews[rid].paper_id
        if remaining_per_paper[pid] >= 2:
            removed.add(rid)
            remaining_per_paper[pid] -= 1
    reviews = {rid: r for rid, r in dataset.reviews.items() if rid not in removed}
    return Dataset(papers=dataset.papers, reviews=reviews, scale=dataset.scale)


# -- multi-run benchmark -------------------------------------------------------


@dataclass(frozen=True)
class MethodSpec:
    """One ranking method in a benchmark: a method name, an optional feature
    configuration (GPPL only) and parameter overrides."""

    method: str
    feature_config: Optional[str] = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        known = ("gppl", "dcon", "ncon") + BASELINE_METHODS
        if self.method not in known:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {known}")


@dataclass
class EvaluationReport:
    methods: dict
    runs: int
    seeds: list[int]
    failures: list[dict]
    split_id: Optional[str] = None
    config: dict = field(default_factory=dict)
    rankings: dict = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict:
        return {
            "methods": self.methods,
            "runs": self.runs,
            "seeds": self.seeds,
            "failures": self.failures,
            "split_id": self.split_id,
            "config": self.config,
        }

    def mean(self, method: str, metric: str) -> Optional[float]:
        cell = self.methods.get(method, {}).get(metric)
        return None if cell is None else cell.get("mean")


def _aggregate(values: list[Optional[float]]) -> Optional[dict]:
    present = [v for v in values if v is not None]
    if not present:
        return None
    arr = np.asarray(present, dtype=float)
    return {
        "mean": float(arr.mean()),
        "sd": float(arr.std()),
        "n": len(present),
        "values": [float(v) for v in present],
    }


def _rank_once(
    spec: MethodSpec,
    dataset: Dataset,
    features,
    pairs,
    run_seed: int,
) -> RankingResult:
    if spec.method in BASELINE_METHODS:
        return rank_baseline(dataset, BaselineSpec(method=spec.method, **spec.params))
    if spec.method in ("dcon", "ncon"):
        strict = filter_pairs(pairs, "drop-ties")
        cfg = ConsensusConfig(seed=run_seed, **spec.params)
        if spec.method == "dcon":
            result, _ = dcon(strict, cfg, papers=dataset.papers)
            return result
        return ncon(strict, cfg, papers=dataset.papers)
    # gppl: shuffle the pair multiset with the run seed and reseed the model
    rng = np.random.default_rng(run_seed)
    shuffled = [pairs[i] for i in rng.permutation(len(pairs))]
    overrides = dict(spec.params)
    overrides.setdefault("inducing_count", min(500, len(dataset.papers)))
    config = GpplConfig(seed=run_seed, **overrides)
    model = GpplRanker.from_config(config).fit(features, shuffled)
    return model.predict_utilities(features)


def _resolve_feature_config(spec: MethodSpec) -> Optional[FeatureConfig]:
    if spec.feature_config is None:
        return None
    if isinstance(spec.feature_config, FeatureConfig):
        return spec.feature_config
    return feature_config(spec.feature_config)


def _guarded(fn, *args):
    try:
        return fn(*args)
    except PaperRankError as exc:
        return exc


def run_benchmark(
    dataset: Dataset,
    gold: GoldStandard,
    methods: Sequence[MethodSpec],
    runs: int = 5,
    seeds: Optional[Sequence[int]] = None,
    text_features: Optional[TextFeatureTable] = None,
    eval_papers: Optional[Iterable[str]] = None,
    keep_rankings: bool = False,
    n_workers: int = 1,
) -> EvaluationReport:
    """Train/apply every method over seeded runs with shuffled inputs and
    aggregate the effectiveness metrics as mean and standard deviation.

    Each (run, method) task draws from its own seeded stream, so results do
    not depend on the execution schedule; per-run failures are recorded and
    excluded from aggregation.
    """
    seeds = list(seeds) if seeds is not None else list(range(runs))
    if len(seeds) != runs:
        raise ConfigError(f"need {runs} seeds, got {len(seeds)}")
    eval_gold = gold.restrict(eval_papers) if eval_papers is not None else gold

    pairs = preference_pairs(dataset)
    features_by_config: dict = {}
    for spec in methods:
        if spec.method == "gppl":
            cfg = _resolve_feature_config(spec)
            key = repr(spec.feature_config)
            if key not in features_by_config:
                features_by_config[key] = assemble(dataset, cfg, text_features)

    per_method: dict[str, dict[str, list[Optional[float]]]] = {
        spec.method: {k: [] for k in METRIC_KEYS} for spec in methods
    }
    rankings: dict[str, list[RankingResult]] = {spec.method: [] for spec in methods}
    failures: list[dict] = []

    def one_task(run_idx: int, spec: MethodSpec):
        features = features_by_config.get(repr(spec.feature_config))
        result = _rank_once(spec, dataset, features, pairs, seeds[run_idx])
        return result, effectiveness(result, eval_gold)

    tasks = [(run_idx, spec) for run_idx in range(runs) for spec in methods]
    if n_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(lambda t: _guarded(one_task, *t), tasks))
    else:
        outcomes = [_guarded(one_task, *t) for t in tasks]

    for (run_idx, spec), outcome in zip(tasks, outcomes):
        if isinstance(outcome, PaperRankError):
            warnings.warn(f"{spec.method} failed on run {run_idx}: {outcome}")
            failures.append({"method": spec.method, "run": run_idx, "error": str(outcome)})
            continue
        result, metrics = outcome
        if keep_rankings:
            rankings[spec.method].append(result)
        for key, value in metrics.as_dict().items():
            per_method[spec.method][key].append(value)

    return EvaluationReport(
        methods={
            m: {k: _aggregate(v) for k, v in metric_lists.items()}
            for m, metric_lists in per_method.items()
        },
        runs=runs,
        seeds=seeds,
        failures=failures,
        rankings=rankings if keep_rankings else {},
    )


def ranking_consistency(original: RankingResult, perturbed: RankingResult) -> Optional[float]:
    """Spearman correlation between a ranking and its perturbed-input twin."""
    common = sorted(set(original.utilities) & set(perturbed.utilities))
    return spearman(
        [original.utilities[p] for p in common], [perturbed.utilities[p] for p in common]
    )


def run_scenario_suite(
    dataset: Dataset,
    gold: GoldStandard,
    methods: Sequence[MethodSpec],
    perturbations: Sequence[PerturbationConfig] = (),
    runs: int = 5,
    seeds: Optional[Sequence[int]] = None,
    text_features: Optional[TextFeatureTable] = None,
    eval_papers: Optional[Iterable[str]] = None,
    n_workers: int = 1,
) -> dict:
    """Unperturbed benchmark plus one benchmark per perturbation scenario,
    including each method's ranking consistency against its unperturbed run."""
    base = run_benchmark(
        dataset, gold, methods, runs, seeds, text_features, eval_papers,
        keep_rankings=True, n_workers=n_workers,
    )
    out = {"baseline": base.as_dict(), "scenarios": []}
    for pcfg in perturbations:
        perturbed = perturb(dataset, pcfg)
        rep = run_benchmark(
            perturbed, gold, methods, runs, seeds, text_features, eval_papers,
            keep_rankings=True, n_workers=n_workers,
        )
        consistency = {}
        for spec in methods:
            rhos = [
                ranking_consistency(orig, pert)
                for orig, pert in zip(base.rankings[spec.method], rep.rankings[spec.method])
            ]
            consistency[spec.method] = _aggregate(rhos)
        out["scenarios"].append(
            {
                "perturbation": {
                    "kind": pcfg.kind,
                    "sigma": pcfg.sigma,
                    "alpha": pcfg.alpha,
                    "weights": dict(pcfg.weights),
                    "seed": pcfg.seed,
                },
                "report": rep.as_dict(),
                "consistency": consistency,
            }
        )
    return out


def efficiency_curve(
    dataset: Dataset,
    gold: GoldStandard,
    methods: Sequence[MethodSpec],
    alphas: Sequence[float] = (0.3, 0.6),
    runs: int = 5,
    seeds: Optional[Sequence[int]] = None,
    text_features: Optional[TextFeatureTable] = None,
    eval_papers: Optional[Iterable[str]] = None,
    n_workers: int = 1,
) -> dict:
    """Benchmark at increasing review-removal fractions (0 = full dataset)."""
    points = {}
    for alpha in (0.0, *alphas):
        if alpha == 0.0:
            d = dataset
        else:
            d = perturb(dataset, PerturbationConfig(kind="review-subsample", alpha=alpha, seed=1000))
        rep = run_benchmark(
            d, gold, methods, runs, seeds, text_features, eval_papers, n_workers=n_workers
        )
        points[float(alpha)] = rep
    return points
