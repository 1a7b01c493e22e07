"""Command-line interface: summarize, evaluate, and dataset pipeline runs."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .corpus import TaskUnit, default_stopwords, load_stopwords, load_task_unit
from .errors import FormatError, GraphsumError
from .features import load_contextual_embeddings, load_embedding_table
from .fusion import (
    DEFAULT_FUSION_FEATURES,
    FEATURES,
    FeatureResources,
    resolve_partition_count,
    run_feature,
    run_graph_fusion,
    run_late_fusion,
)
from .report import (
    dump_json,
    render_score_bars,
    render_selection_figures,
    rouge_dict,
    selection_report,
    summary_lines,
    write_json_atomic,
    write_scores_tsv,
    write_text_atomic,
)
from .rouge import METRICS, score_all
from .selection import SelectionConfig
from .similarity import save_graph_tsv

# Config-file keys (long flag names) and their value parsing.
_CONFIG_SPEC = {
    "input": str, "format": str, "feature": "csv", "fusion": str,
    "fusion-weights": str, "embeddings": str, "contextual": str,
    "use-compressed": "flag", "split": "flag", "stopwords": str,
    "budget-bytes": int, "budget-sentences": int, "budget-cost": float,
    "lambda": float, "k-nn": int, "partitions": int, "seed": int,
    "no-lazy": "flag", "allow-missing": "flag", "export-graph": str,
    "figures": str, "output": str, "metrics": str, "byte-limit": int,
    "no-stem": "flag", "jobs": int,
}
_DEST_OVERRIDES = {"lambda": "lam"}


def parse_config_file(path: str | Path) -> dict:
    """Plain "key = value" lines; keys match long flag names; '#' comments."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_SPEC:
            raise FormatError(f"{path}: line {lineno}: unknown config key {key!r}")
        kind = _CONFIG_SPEC[key]
        dest = _DEST_OVERRIDES.get(key, key.replace("-", "_"))
        try:
            if kind == "flag":
                out[dest] = value.lower() in ("1", "true", "yes", "on")
            elif kind == "csv":
                out[dest] = [v.strip() for v in value.split(",") if v.strip()]
            else:
                out[dest] = kind(value)
        except ValueError as e:
            raise FormatError(f"{path}: line {lineno}: bad value for {key!r}: {value!r}") from e
    return out


def _add_engine_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="task unit file (or dataset directory for pipeline)")
    p.add_argument("--format", choices=["lines", "cluster-json"], default=None,
                   help="input format (default: by file extension)")
    p.add_argument("--feature", action="append", choices=list(FEATURES), default=None,
                   help="feature source; repeatable")
    p.add_argument("--fusion", choices=["none", "graph", "late"], default="none")
    p.add_argument("--fusion-weights", default=None,
                   help="comma-separated nonnegative weights for graph fusion")
    p.add_argument("--embeddings", default=None, help="static word-vector text file")
    p.add_argument("--contextual", default=None, help="contextual token-vector JSONL file")
    p.add_argument("--use-compressed", action="store_true",
                   help="operate on the compressed sentence variants")
    p.add_argument("--split", action="store_true",
                   help="apply the built-in sentence splitter to lines input")
    p.add_argument("--stopwords", default=None, help="override the bundled stopword list")
    budget = p.add_mutually_exclusive_group()
    budget.add_argument("--budget-bytes", type=int, default=None)
    budget.add_argument("--budget-sentences", type=int, default=None)
    budget.add_argument("--budget-cost", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=6.0,
                   help="diversity weight (default 6.0)")
    p.add_argument("--k-nn", type=int, default=7, help="local-scaling neighbor rank (default 7)")
    p.add_argument("--partitions", type=int, default=None,
                   help="diversity cluster count (default: max(2, n/5))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-lazy", action="store_true", help="use naive instead of lazy greedy")
    p.add_argument("--allow-missing", action="store_true",
                   help="tolerate sentences absent from the contextual file")
    p.add_argument("--export-graph", default=None, help="write the similarity graph as TSV")
    p.add_argument("--figures", default=None, help="render diagnostic figures into this directory")
    p.add_argument("--config", default=None, help="config file of 'key = value' lines")


def build_parser():
    parser = argparse.ArgumentParser(prog="graphsum", description=__doc__)
    parser.add_argument("--version", action="version", version=f"graphsum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("summarize", help="summarize one task unit")
    _add_engine_options(ps)
    ps.add_argument("--output", default="summary.txt",
                    help="summary text path; the JSON report lands next to it")
    ps.set_defaults(func=cmd_summarize)

    pe = sub.add_parser("evaluate", help="score a candidate summary against references")
    pe.add_argument("candidate", help="candidate summary text file")
    pe.add_argument("references", nargs="+", help="reference summary text file(s)")
    pe.add_argument("--metrics", default="r1,r2,rl")
    pe.add_argument("--byte-limit", type=int, default=None)
    pe.add_argument("--no-stem", action="store_true")
    pe.add_argument("--output", default=None, help="also write the scores as JSON")
    pe.add_argument("--config", default=None)
    pe.set_defaults(func=cmd_evaluate)

    pp = sub.add_parser("pipeline", help="summarize and evaluate a dataset directory")
    _add_engine_options(pp)
    pp.add_argument("--metrics", default="r1,r2,rl")
    pp.add_argument("--byte-limit", type=int, default=None)
    pp.add_argument("--no-stem", action="store_true")
    pp.add_argument("--jobs", type=int, default=1)
    pp.add_argument("--output", default="pipeline_report.json")
    pp.set_defaults(func=cmd_pipeline)

    return parser, {"summarize": ps, "evaluate": pe, "pipeline": pp}


def _parse_metrics(spec: str) -> tuple[str, ...]:
    metrics = tuple(m.strip() for m in spec.split(",") if m.strip())
    for m in metrics:
        if m not in METRICS:
            raise FormatError(f"unknown metric {m!r} (choose from {', '.join(METRICS)})")
    return metrics


def _resolve_format(args, path: Path) -> str:
    if args.format:
        return args.format
    return "cluster-json" if path.suffix == ".json" else "lines"


def _load_unit(args, path: Path) -> TaskUnit:
    stops = load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
    return load_task_unit(
        path,
        _resolve_format(args, path),
        stopwords=stops,
        use_compressed=args.use_compressed,
        split=args.split,
    )


def _resolve_budget(args, unit: TaskUnit) -> tuple[str, float]:
    if args.budget_bytes is not None:
        return "bytes", float(args.budget_bytes)
    if args.budget_sentences is not None:
        return "sentences", float(args.budget_sentences)
    if args.budget_cost is not None:
        return "cost", float(args.budget_cost)
    # DUC-style byte cap for multi-document clusters, three sentences for
    # single documents.
    n_docs = len({s.doc_id for s in unit.sentences})
    return ("bytes", 665.0) if n_docs > 1 else ("sentences", 3.0)


def _resolve_features(args) -> list[str]:
    if args.feature:
        features = list(args.feature)
    else:
        features = list(DEFAULT_FUSION_FEATURES) if args.fusion != "none" else ["tfidf"]
    if args.fusion == "none" and len(features) > 1:
        raise FormatError("--fusion none takes exactly one --feature")
    if args.fusion in ("graph", "late") and len(features) < 2:
        raise FormatError(f"--fusion {args.fusion} needs at least two features")
    return features


def _load_resources(args, unit: TaskUnit) -> FeatureResources:
    table = load_embedding_table(args.embeddings) if args.embeddings else None
    contextual = None
    if args.contextual:
        contextual = load_contextual_embeddings(
            args.contextual, unit, allow_missing=args.allow_missing
        )
    return FeatureResources(table=table, contextual=contextual)


def _run_unit(args, unit: TaskUnit):
    """Run the configured engine on one unit.

    Returns (per-feature graphs, operative fused graph or None, result,
    effective-config dict).
    """
    features = _resolve_features(args)
    resources = _load_resources(args, unit)
    mode, value = _resolve_budget(args, unit)
    config = SelectionConfig(
        budget_mode=mode,
        budget=value,
        lam=args.lam,
        k_partitions=resolve_partition_count(unit.n, args.partitions),
        seed=args.seed,
        lazy=not args.no_lazy,
    )
    weights = None
    if args.fusion_weights:
        weights = [float(x) for x in args.fusion_weights.split(",")]
        if len(weights) != len(features):
            raise FormatError(
                f"{len(features)} features but {len(weights)} fusion weights"
            )

    if args.fusion == "graph":
        graphs, fused, result = run_graph_fusion(
            unit, features, weights or [1.0] * len(features), resources, config, args.k_nn
        )
    elif args.fusion == "late":
        graphs, result = run_late_fusion(unit, features, resources, config, args.k_nn)
        fused = None
    else:
        graph, result = run_feature(unit, features[0], resources, config, args.k_nn)
        graphs, fused = [graph], graph

    effective = {
        "feature": features,
        "fusion": args.fusion,
        "fusion-weights": weights,
        "budget-mode": mode,
        "budget": value,
        "lambda": args.lam,
        "k-nn": args.k_nn,
        "partitions": config.k_partitions,
        "seed": args.seed,
        "lazy": not args.no_lazy,
        "use-compressed": args.use_compressed,
    }
    return graphs, fused, result, effective


def _report_path(output: Path) -> Path:
    base = output.name.rsplit(".", 1)[0] if "." in output.name else output.name
    return output.with_name(base + ".report.json")


def cmd_summarize(args) -> int:
    unit = _load_unit(args, Path(args.input))
    graphs, fused, result, effective = _run_unit(args, unit)
    output = Path(args.output)
    write_text_atomic(output, "\n".join(summary_lines(unit, result)) + "\n")
    report = selection_report(unit, result, [g.meta for g in graphs], effective)
    write_json_atomic(_report_path(output), report)
    if args.export_graph:
        if fused is not None:
            save_graph_tsv(fused, args.export_graph)
        else:  # late fusion has no single graph; export one per feature
            for g in graphs:
                save_graph_tsv(g, f"{args.export_graph}.{g.meta}.tsv")
    if args.figures:
        render_selection_figures(args.figures, graphs if fused is None else [fused], result)
    return 0


def cmd_evaluate(args) -> int:
    candidate = Path(args.candidate).read_text("utf-8")
    references = [Path(r).read_text("utf-8") for r in args.references]
    metrics = _parse_metrics(args.metrics)
    reports = score_all(
        candidate, references, metrics,
        byte_limit=args.byte_limit, stemming=not args.no_stem,
    )
    blocks = {m: rouge_dict(rep) for m, rep in reports.items()}
    for m in metrics:
        print(dump_json(blocks[m]), end="")
    if args.output:
        write_json_atomic(args.output, blocks)
    return 0


def _pipeline_one(args, path: Path, metrics: tuple[str, ...]):
    unit = _load_unit(args, path)
    _, fused, result, effective = _run_unit(args, unit)
    summary = "\n".join(summary_lines(unit, result))
    entry = {
        "unit_id": unit.unit_id,
        "selected": list(result.selected),
        "summary": summary_lines(unit, result),
        "budget": {
            "mode": result.config.budget_mode,
            "limit": result.config.budget,
            "used": result.budget_used,
        },
        "scores": None,
    }
    if unit.references:
        reports = score_all(
            summary, list(unit.references), metrics,
            byte_limit=args.byte_limit, stemming=not args.no_stem,
        )
        entry["scores"] = {m: rouge_dict(rep) for m, rep in reports.items()}
    return entry, effective


def cmd_pipeline(args) -> int:
    root = Path(args.input)
    if not root.is_dir():
        raise FormatError(f"{root}: pipeline input must be a directory of cluster-json units")
    paths = sorted(root.glob("*.json"))
    if not paths:
        raise FormatError(f"{root}: no *.json task units found")
    metrics = _parse_metrics(args.metrics)

    entries: list[dict] = []
    failures: list[dict] = []
    effective = None
    jobs = max(1, args.jobs)

    def work(path: Path):
        return path, _pipeline_one(args, path, metrics)

    if jobs == 1:
        outcomes = []
        for p in paths:
            try:
                outcomes.append((p, work(p)[1], None))
            except (GraphsumError, OSError, ValueError) as e:
                outcomes.append((p, None, e))
    else:
        outcomes = []
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(work, p): p for p in paths}
            for fut, p in futures.items():
                try:
                    outcomes.append((p, fut.result()[1], None))
                except (GraphsumError, OSError, ValueError) as e:
                    outcomes.append((p, None, e))

    for path, payload, err in outcomes:
        if err is not None:
            failures.append({"path": str(path), "error": str(err)})
            continue
        entry, eff = payload
        entries.append(entry)
        effective = eff

    entries.sort(key=lambda e: e["unit_id"])
    failures.sort(key=lambda f: f["path"])

    means: dict[str, dict] = {}
    scored = [e for e in entries if e["scores"]]
    for m in metrics:
        if scored:
            means[m] = {
                x: round(sum(e["scores"][m][x] for e in scored) / len(scored), 4)
                for x in ("p", "r", "f")
            }

    report = {
        "config": effective,
        "units": entries,
        "means": means,
        "failures": failures,
    }
    output = Path(args.output)
    write_json_atomic(output, report)
    if means:
        write_scores_tsv(output.with_name(output.stem + "_scores.tsv"), entries, means)
    if args.figures and means:
        Path(args.figures).mkdir(parents=True, exist_ok=True)
        render_score_bars(means, Path(args.figures) / "corpus_scores.png")
    return 1 if failures else 0


def _scan_config(argv: list[str]) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    cfg_path = _scan_config(argv)
    if cfg_path:
        try:
            defaults = parse_config_file(cfg_path)
        except (GraphsumError, OSError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        for sp in subparsers.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphsumError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
