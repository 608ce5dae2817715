"""Command-line pipelines: ingest, rank, benchmark, efficiency plot.

Every command that writes an output file also writes a ``<out>.manifest.json``
recording the command, config snapshot, input digests, seed and tool version,
so outputs are reproducible from their manifest.

Exit codes: 0 success, 2 invalid input data, 3 computation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .agreement import dataset_alpha
from .baselines import BASELINE_METHODS, BaselineSpec, rank_baseline
from .consensus import ConsensusConfig, dcon, ncon
from .data import Dataset, ScaleSpec, dataset_stats, load_dataset
from .errors import DataError, PaperRankError
from .evaluation import (
    MethodSpec,
    PerturbationConfig,
    build_gold,
    comm_weights,
    efficiency_curve,
    run_scenario_suite,
    split,
)
from .features import FeatureConfig, assemble, feature_config, read_text_features
from .gppl import GpplConfig, GpplRanker
from .preferences import filter_pairs, preference_pairs
from .ranking import write_ranking

logger = logging.getLogger(__name__)

RANK_METHODS = ("gppl", "dcon", "ncon") + BASELINE_METHODS


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path: str, command: str, args: argparse.Namespace, started: str, config: dict):
    inputs = {}
    for key in ("reviews", "papers", "scale", "features", "scenario"):
        value = getattr(args, key, None)
        if value:
            inputs[key] = {"path": value, "sha256": _sha256(value)}
    manifest = {
        "tool": "paperrank",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": inputs,
        "seed": getattr(args, "seed", None),
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "threads": _default_threads(),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PAPERRANK_THREADS", "1")))
    except ValueError:
        return 1


def _load(args) -> Dataset:
    scale = ScaleSpec.from_json(args.scale)
    return load_dataset(args.reviews, args.papers, scale)


def _resolve_feature_config(name: str) -> FeatureConfig:
    if name.startswith("custom:"):
        with open(name.split(":", 1)[1], "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return FeatureConfig(
            blocks=tuple(doc["blocks"]),
            standardize=doc.get("standardize", {}),
            embed_sections=tuple(doc["embed_sections"]) if doc.get("embed_sections") else None,
        )
    return feature_config(name)


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(args) -> int:
    dataset = _load(args)
    stats = dataset_stats(dataset)
    for line in stats.format_lines():
        print(line)
    alpha = dataset_alpha(dataset)
    print(f"krippendorff alpha (ordinal): {alpha:.4f}" if alpha is not None else
          "krippendorff alpha (ordinal): undefined")
    n_pairs = len(preference_pairs(dataset))
    print(f"preference pairs:    {n_pairs}")
    return 0


def cmd_rank(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    dataset = _load(args)
    method = args.method
    if method in BASELINE_METHODS:
        result = rank_baseline(dataset, BaselineSpec(method=method))
    elif method in ("dcon", "ncon"):
        pairs = filter_pairs(preference_pairs(dataset), "drop-ties")
        cfg = ConsensusConfig(time_budget=args.time_budget, seed=args.seed)
        if method == "dcon":
            result, status = dcon(pairs, cfg, papers=dataset.papers)
            logger.info("dcon status: %s", status)
        else:
            result = ncon(pairs, cfg, papers=dataset.papers)
    else:
        fconfig = _resolve_feature_config(args.feature_config)
        table = read_text_features(args.features) if args.features else None
        features = assemble(dataset, fconfig, table)
        pairs = preference_pairs(dataset)
        config = GpplConfig(seed=args.seed, inducing_count=min(500, len(dataset.papers)))
        model = GpplRanker.from_config(config).fit(features, pairs)
        result = model.predict_utilities(features)
        if args.model_out:
            model.save(args.model_out)
    write_ranking(result, args.out)
    _write_manifest(args.out, "rank", args, started, dict(result.config))
    print(f"wrote {args.out} ({len(result.ranks)} papers, method {method})")
    return 0


def _parse_scenario(path: str, scale: ScaleSpec, runs_override=None, seed_override=None) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if runs_override is not None:
        doc["runs"] = runs_override
    if seed_override is not None and "seeds" not in doc:
        doc["seeds"] = [seed_override + i for i in range(doc.get("runs", 5))]
    methods = [
        MethodSpec(
            method=m["method"],
            feature_config=m.get("feature_config"),
            params=m.get("params", {}),
        )
        for m in doc.get("methods", [{"method": "mean-s-w"}])
    ]
    perturbations = []
    for p in doc.get("perturbations", []):
        weights = p.get("weights", {})
        if "preset" in p:
            weights = comm_weights(p["preset"], scale.aspect_names)
            p = {**p, "kind": "commensuration"}
        perturbations.append(
            PerturbationConfig(
                kind=p["kind"],
                sigma=p.get("sigma", 0.5 if p["kind"] == "commensuration" else 0.0),
                alpha=p.get("alpha", 0.3),
                weights=weights,
                seed=p.get("seed", 0),
            )
        )
    return {
        "methods": methods,
        "perturbations": perturbations,
        "runs": doc.get("runs", 5),
        "seeds": doc.get("seeds"),
        "dev_fraction": doc.get("dev_fraction"),
        "split_seed": doc.get("split_seed", 0),
        "evaluate_on": doc.get("evaluate_on", "test"),
        "efficiency_alphas": doc.get("efficiency_alphas", []),
    }


def _evaluation_subset(dataset, gold, scenario):
    if scenario["dev_fraction"] is None:
        return None, None
    dev, test = split(dataset, gold, scenario["dev_fraction"], scenario["split_seed"])
    eval_papers = dev if scenario["evaluate_on"] == "dev" else test
    return eval_papers, f"{scenario['evaluate_on']}@{scenario['split_seed']}"


def cmd_benchmark(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    dataset = _load(args)
    gold = build_gold(dataset)
    scenario = _parse_scenario(args.scenario, dataset.scale, args.runs, args.seed)
    table = read_text_features(args.features) if args.features else None
    eval_papers, split_id = _evaluation_subset(dataset, gold, scenario)
    suite = run_scenario_suite(
        dataset,
        gold,
        scenario["methods"],
        scenario["perturbations"],
        runs=scenario["runs"],
        seeds=scenario["seeds"],
        text_features=table,
        eval_papers=eval_papers,
        n_workers=_default_threads(),
    )
    suite["split_id"] = split_id
    suite["config"] = {
        "scenario_file": args.scenario,
        "runs": scenario["runs"],
        "methods": [
            {"method": m.method, "feature_config": str(m.feature_config), "params": dict(m.params)}
            for m in scenario["methods"]
        ],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(suite, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out, "benchmark", args, started, {"scenario": args.scenario})
    if args.table:
        _write_table(suite, args.table)
        _write_manifest(args.table, "benchmark-table", args, started, {"scenario": args.scenario})
    print(f"wrote {args.out}")
    return 0


def _format_cell(cell) -> str:
    if cell is None:
        return "-"
    return f"{cell['mean']:.4f}+-{cell['sd']:.4f}"


def _write_table(suite: dict, path: str) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "method", "AUROC", "PRAUC", "rho raw", "rho norm."])
        def rows(tag, report):
            for method, cells in sorted(report["methods"].items()):
                writer.writerow(
                    [tag, method] + [_format_cell(cells[k]) for k in ("auroc", "prauc", "rho_raw", "rho_norm")]
                )
        rows("baseline", suite["baseline"])
        for sc in suite["scenarios"]:
            p = sc["perturbation"]
            tag = f"{p['kind']}:sigma={p['sigma']}:alpha={p['alpha']}"
            rows(tag, sc["report"])


def cmd_plot_efficiency(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    started = datetime.now(timezone.utc).isoformat()
    dataset = _load(args)
    gold = build_gold(dataset)
    scenario = _parse_scenario(args.scenario, dataset.scale, args.runs, args.seed)
    table = read_text_features(args.features) if args.features else None
    eval_papers, _ = _evaluation_subset(dataset, gold, scenario)
    alphas = scenario["efficiency_alphas"] or [0.3, 0.6]
    points = efficiency_curve(
        dataset,
        gold,
        scenario["methods"],
        alphas=alphas,
        runs=scenario["runs"],
        seeds=scenario["seeds"],
        text_features=table,
        eval_papers=eval_papers,
        n_workers=_default_threads(),
    )
    fig, ax = plt.subplots(figsize=(6, 4))
    ax2 = ax.twinx()
    xs = sorted(points)
    for spec in scenario["methods"]:
        aurocs = [points[x].mean(spec.method, "auroc") for x in xs]
        rhos = [points[x].mean(spec.method, "rho_raw") for x in xs]
        ax.plot(xs, aurocs, marker="o", label=f"{spec.method} AUROC")
        ax2.plot(xs, rhos, marker="s", linestyle="--", label=f"{spec.method} rho")
    ax.set_xlabel("fraction of removed reviews")
    ax.set_ylabel("AUROC")
    ax2.set_ylabel("Spearman rho (dashed)")
    handles1, labels1 = ax.get_legend_handles_labels()
    handles2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(handles1 + handles2, labels1 + labels2, fontsize=7, loc="lower left")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    curve_json = {
        str(x): points[x].as_dict() for x in xs
    }
    with open(args.out + ".data.json", "w", encoding="utf-8") as fh:
        json.dump(curve_json, fh, indent=2, sort_keys=True)
    _write_manifest(args.out, "plot-efficiency", args, started, {"alphas": list(map(float, xs))})
    print(f"wrote {args.out}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paperrank", description=__doc__)
    parser.add_argument("--version", action="version", version=f"paperrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, needs_out=True):
        p.add_argument("--reviews", required=True, help="reviews JSONL file")
        p.add_argument("--papers", required=True, help="papers JSONL file")
        p.add_argument("--scale", required=True, help="scale spec JSON")
        if needs_out:
            p.add_argument("--out", required=True, help="output path")

    p_ingest = sub.add_parser("ingest", help="validate a dataset and print its statistics")
    add_io(p_ingest, needs_out=False)
    p_ingest.set_defaults(func=cmd_ingest)

    p_rank = sub.add_parser("rank", help="rank papers with one method")
    add_io(p_rank)
    p_rank.add_argument("--method", required=True, choices=RANK_METHODS)
    p_rank.add_argument("--feature-config", default="accept-opt",
                        help="accept-opt | cite-opt | score-only | custom:<file>")
    p_rank.add_argument("--features", help="text-feature CSV (needed for embedding/discourse blocks)")
    p_rank.add_argument("--seed", type=int, default=0)
    p_rank.add_argument("--time-budget", type=float, default=300.0, help="consensus solver budget (s)")
    p_rank.add_argument("--model-out", help="persist the fitted GPPL model here")
    p_rank.set_defaults(func=cmd_rank)

    p_bench = sub.add_parser("benchmark", help="run a scenario file end to end")
    add_io(p_bench)
    p_bench.add_argument("--scenario", required=True, help="scenario JSON")
    p_bench.add_argument("--features", help="text-feature CSV")
    p_bench.add_argument("--table", help="also write a methods-x-metrics CSV table here")
    p_bench.add_argument("--runs", type=int, help="override the scenario's run count")
    p_bench.add_argument("--seed", type=int, help="base seed when the scenario lists none")
    p_bench.set_defaults(func=cmd_benchmark)

    p_plot = sub.add_parser("plot-efficiency", help="efficiency curve under review sub-sampling")
    add_io(p_plot)
    p_plot.add_argument("--scenario", required=True, help="scenario JSON (methods, runs, alphas)")
    p_plot.add_argument("--features", help="text-feature CSV")
    p_plot.add_argument("--runs", type=int, help="override the scenario's run count")
    p_plot.add_argument("--seed", type=int, help="base seed when the scenario lists none")
    p_plot.set_defaults(func=cmd_plot_efficiency)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("PAPERRANK_LOGLEVEL", "INFO"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PaperRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
