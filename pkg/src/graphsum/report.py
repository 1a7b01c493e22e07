"""Report artifacts: JSON reports, delimited score tables, rendered figures.

Reports are written atomically (temp file + rename) with sorted keys so
identical runs produce byte-identical files. Figures are diagnostic PNGs
rendered next to the delimited output.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .corpus import TaskUnit
from .rouge import RougeReport
from .selection import SelectionResult
from .similarity import SimilarityGraph


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json_atomic(path: str | Path, obj) -> None:
    write_text_atomic(path, dump_json(obj))


def summary_lines(unit: TaskUnit, result: SelectionResult) -> list[str]:
    """Selected sentences in document order (selection order lives in the trace)."""
    return [unit.emitted_text(unit.sentences[s]) for s in sorted(result.selected)]


def rouge_dict(report: RougeReport) -> dict:
    return {
        "metric": report.metric,
        "p": round(report.precision, 4),
        "r": round(report.recall, 4),
        "f": round(report.f1, 4),
    }


def selection_report(
    unit: TaskUnit,
    result: SelectionResult,
    sources: list[str],
    effective_config: dict,
) -> dict:
    return {
        "unit_id": unit.unit_id,
        "sources": sources,
        "selected": list(result.selected),
        "summary": summary_lines(unit, result),
        "trace": [
            {"sent_id": t.sent_id, "gain": t.gain, "objective": t.objective}
            for t in result.objective_trace
        ],
        "budget": {
            "mode": result.config.budget_mode,
            "limit": result.config.budget,
            "used": result.budget_used,
        },
        "config": effective_config,
    }


def write_scores_tsv(path: str | Path, unit_rows: list[dict], means: dict) -> None:
    """Delimited per-unit scores: one row per unit plus a mean row."""
    metrics = sorted(means)
    header = ["unit_id"] + [f"{m}_{x}" for m in metrics for x in ("p", "r", "f")]
    lines = ["\t".join(header)]
    for row in unit_rows:
        cells = [row["unit_id"]]
        for m in metrics:
            sc = row.get("scores", {}).get(m)
            cells += [f"{sc[x]:.4f}" if sc else "" for x in ("p", "r", "f")]
        lines.append("\t".join(cells))
    mean_cells = ["MEAN"] + [f"{means[m][x]:.4f}" for m in metrics for x in ("p", "r", "f")]
    lines.append("\t".join(mean_cells))
    write_text_atomic(path, "\n".join(lines) + "\n")


def render_graph_heatmap(graph: SimilarityGraph, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(graph.w, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_title(f"similarity ({graph.meta}, k={graph.k_nn})")
    ax.set_xlabel("sentence")
    ax.set_ylabel("sentence")
    fig.colorbar(im, ax=ax, label="edge weight")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_objective_trace(result: SelectionResult, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    steps = range(1, len(result.objective_trace) + 1)
    values = [t.objective for t in result.objective_trace]
    ax.step(list(steps), values, where="post", marker="o")
    for x, t in zip(steps, result.objective_trace):
        ax.annotate(str(t.sent_id), (x, t.objective), textcoords="offset points",
                    xytext=(0, 6), ha="center", fontsize=8)
    ax.set_xlabel("selection step")
    ax.set_ylabel("objective value")
    ax.set_title("greedy objective trace")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_score_bars(means: dict, path: str | Path) -> None:
    metrics = sorted(means)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    width = 0.25
    for i, stat in enumerate(("p", "r", "f")):
        xs = [j + (i - 1) * width for j in range(len(metrics))]
        ax.bar(xs, [means[m][stat] for m in metrics], width=width, label=stat)
    ax.set_xticks(range(len(metrics)))
    ax.set_xticklabels([m.upper() for m in metrics])
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title("corpus mean scores")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_selection_figures(
    out_dir: str | Path,
    graphs: list[SimilarityGraph],
    result: SelectionResult,
    prefix: str = "",
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for g in graphs:
        p = out_dir / f"{prefix}graph_{g.meta.replace('(', '_').replace(')', '').replace('+', '_')}.png"
        render_graph_heatmap(g, p)
        written.append(p)
    if result.objective_trace:
        p = out_dir / f"{prefix}objective_trace.png"
        render_objective_trace(result, p)
        written.append(p)
    return written
