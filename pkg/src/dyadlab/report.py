"""Report emission: canonical JSON, CSV tables, DOT graphs, figures.

Every writer is deterministic for a fixed payload: JSON comes out with
sorted keys and a trailing newline, CSV rows keep their given order,
and values are printed exactly (dyadics as num/2^exp, fractions as
a/b), never through floats.  Figures are rendered headless and sit
next to the main report file, sharing its stem.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .assembly import FolnerReport, PipelineResult, SchreierGraph
from .density import ErrorLedger, GeneratorPlan, SynthesisResult

REPORT_DIR_VAR = "DYADLAB_REPORT_DIR"

__all__ = [
    "REPORT_DIR_VAR",
    "canonical_json",
    "digest_file",
    "emit_density",
    "emit_folner",
    "emit_pipeline",
    "emit_schreier",
    "emit_selftest",
    "emit_table",
    "resolve_report_path",
    "schreier_dot",
    "sibling",
    "write_csv",
    "write_json",
]


# -- primitives


def resolve_report_path(path: str | Path) -> Path:
    """Resolve a report path, honoring the report directory variable."""
    p = Path(path)
    base = os.environ.get(REPORT_DIR_VAR)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def sibling(path: Path, tag: str, ext: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{ext}")


def canonical_json(payload: object) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, payload: object) -> Path:
    path.write_text(canonical_json(payload))
    return path


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]
) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def digest_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# -- tabulation helpers


def ledger_rows(ledger: ErrorLedger) -> list[list[object]]:
    return [
        [row.k, row.n, str(row.exact), _frac(row.bound), str(row.slack), row.passed]
        for row in ledger.rows
    ]


LEDGER_HEADER = ("k", "n", "exact", "bound", "slack", "passed")


def synthesis_rows(results: Sequence[SynthesisResult]) -> list[list[object]]:
    return [
        [row.k, row.n, row.letters, str(row.achieved), _frac(row.budget)]
        for row in results
    ]


SYNTHESIS_HEADER = ("k", "n", "letters", "achieved", "budget")


# -- figures


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _plan_figure(plan: GeneratorPlan, path: Path) -> Path:
    ks = list(range(plan.factors))
    eps = [float(e.as_fraction()) for e in plan.eps_seq]
    deltas = [float(d.as_fraction()) for d in plan.delta_seq]
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.bar([k - 0.18 for k in ks], eps, width=0.36, label="eps_k")
    ax.bar([k + 0.18 for k in ks], deltas, width=0.36, label="delta_k")
    ax.set_yscale("log", base=2)
    ax.set_xticks(ks)
    ax.set_xlabel("factor k")
    ax.set_title(f"plan budgets, levels {list(plan.n_seq)}")
    ax.legend()
    return _save(fig, path)


def _budget_figure(result: PipelineResult, path: Path) -> Path:
    supp = float(result.u.support().measure().as_fraction())
    total = float(result.budget.measure.as_fraction())
    cells = float(result.d_star.as_fraction()) * len(result.d_cells)
    free = 1.0 - total - cells
    fig, ax = plt.subplots(figsize=(7.0, 2.2))
    left = 0.0
    for label, width, color in (
        ("supp U", supp, "#d95f02"),
        ("translates", total - supp, "#7570b3"),
        ("cycle cells", cells, "#1b9e77"),
        ("free", free, "#cccccc"),
    ):
        ax.barh(0, width, left=left, label=label, color=color)
        left += width
    gate = float(result.budget.bound)
    ax.axvline(gate, color="black", linestyle="--", linewidth=1)
    ax.text(gate, 0.55, " gate", va="bottom", fontsize=8)
    ax.set_xlim(0, 1)
    ax.set_yticks([])
    ax.set_xlabel("measure")
    ax.set_title("budget partition")
    ax.legend(loc="upper right", ncol=4, fontsize=8)
    return _save(fig, path)


def _census_figure(result: PipelineResult, path: Path) -> Path:
    panels = [(label, census) for label, census in result.order_census]
    fig, axes = plt.subplots(
        1, len(panels), figsize=(2.6 * len(panels), 2.8), squeeze=False
    )
    for ax, (label, census) in zip(axes[0], panels):
        if census:
            lengths = [str(length) for length, _ in census]
            counts = [count for _, count in census]
            ax.bar(lengths, counts)
            ax.set_yscale("log")
        else:
            ax.text(0.5, 0.5, "identity", ha="center", va="center")
            ax.set_xticks([])
            ax.set_yticks([])
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("orbit length", fontsize=8)
    fig.suptitle("orbit censuses at the working level", fontsize=10)
    return _save(fig, path)


def _cycle_figure(graph: SchreierGraph, path: Path) -> Path:
    fig, axes = plt.subplots(
        1, len(graph.labels), figsize=(2.8 * len(graph.labels), 2.8),
        squeeze=False,
    )
    for ax, label, row in zip(axes[0], graph.labels, graph.targets):
        seen = [False] * len(row)
        census: dict[int, int] = {}
        for start in range(len(row)):
            if seen[start]:
                continue
            length = 0
            idx = start
            while not seen[idx]:
                seen[idx] = True
                idx = row[idx]
                length += 1
            census[length] = census.get(length, 0) + 1
        keys = sorted(census)
        ax.bar([str(k) for k in keys], [census[k] for k in keys])
        ax.set_yscale("log")
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("cycle length", fontsize=8)
    fig.suptitle(f"label cycle structure on {len(graph.vertices)} vertices")
    return _save(fig, path)


def _ratio_figure(report: FolnerReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 3.0))
    labels = [label for label, _ in report.rows[0].ratios] if report.rows else []
    width = 0.8 / max(len(labels), 1)
    for j, label in enumerate(labels):
        xs = [row.index + (j - (len(labels) - 1) / 2) * width for row in report.rows]
        ys = [float(dict(row.ratios)[label]) for row in report.rows]
        ax.bar(xs, ys, width=width, label=label)
    for row in report.rows:
        mark = "o" if row.flagged else "x"
        ax.plot(row.index, float(row.max_ratio), mark, color="black", markersize=5)
    ax.set_xticks([row.index for row in report.rows])
    ax.set_xlabel("candidate")
    ax.set_ylabel("boundary ratio")
    ax.set_title("exact boundary ratios (o = within 2/|F|)")
    ax.legend(fontsize=8)
    return _save(fig, path)


# -- DOT output


def schreier_dot(graph: SchreierGraph) -> str:
    """Render the labeled orbit graph in DOT, one color per label."""
    palette = ("black", "firebrick", "royalblue", "seagreen", "darkorange")
    lines = ["digraph schreier {", "  rankdir=LR;", '  node [shape=circle, fontsize=9];']
    for i, w in enumerate(graph.vertices):
        lines.append(f'  {i} [label="{w}"];')
    for j, (label, row) in enumerate(zip(graph.labels, graph.targets)):
        color = palette[j % len(palette)]
        for src, dst in enumerate(row):
            lines.append(
                f'  {src} -> {dst} [label="{label}", color={color}, fontsize=8];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- bundled emitters


def emit_density(
    path: str | Path,
    plan: GeneratorPlan,
    ledger: ErrorLedger | None = None,
    synthesis: Sequence[SynthesisResult] | None = None,
) -> list[Path]:
    """JSON payload plus the ledger table and the plan budget figure."""
    path = resolve_report_path(path)
    payload: dict[str, object] = {"plan": plan.to_json()}
    if ledger is not None:
        payload["ledger"] = ledger.to_json()
    if synthesis is not None:
        payload["synthesis"] = [row.to_json() for row in synthesis]
    written = [write_json(path, payload)]
    if ledger is not None:
        written.append(
            write_csv(sibling(path, "ledger", ".csv"), LEDGER_HEADER, ledger_rows(ledger))
        )
    if synthesis is not None:
        written.append(
            write_csv(
                sibling(path, "synthesis", ".csv"),
                SYNTHESIS_HEADER,
                synthesis_rows(synthesis),
            )
        )
    written.append(_plan_figure(plan, sibling(path, "plan", ".png")))
    return written


def _bar_figure(
    labels: Sequence[object],
    values: Sequence[float],
    title: str,
    path: Path,
    log: bool = False,
) -> Path:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(labels) + 2.0), 3.0))
    ax.bar([str(label) for label in labels], values)
    if log and all(v > 0 for v in values):
        ax.set_yscale("log")
    ax.set_title(title, fontsize=10)
    ax.tick_params(axis="x", labelsize=8)
    return _save(fig, path)


def emit_table(
    path: str | Path,
    payload: dict,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    tag: str = "rows",
    figure: tuple[Sequence[object], Sequence[float], str] | None = None,
) -> list[Path]:
    """JSON payload with one delimited table and an optional bar chart."""
    path = resolve_report_path(path)
    written = [
        write_json(path, payload),
        write_csv(sibling(path, tag, ".csv"), header, rows),
    ]
    if figure is not None:
        labels, values, title = figure
        written.append(_bar_figure(labels, values, title, sibling(path, tag, ".png")))
    return written


def emit_selftest(path: str | Path, certificate: dict) -> list[Path]:
    """Criterion table as JSON, CSV, and a case/failure chart."""
    path = resolve_report_path(path)
    rows = [
        [row["criterion"], row["name"], row["cases"], row["failures"], row["status"]]
        for row in certificate["criteria"]
    ]
    written = [
        write_json(path, certificate),
        write_csv(
            sibling(path, "criteria", ".csv"),
            ("criterion", "name", "cases", "failures", "status"),
            rows,
        ),
    ]
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    names = [row["name"] for row in certificate["criteria"]]
    cases = [row["cases"] for row in certificate["criteria"]]
    failures = [row["failures"] for row in certificate["criteria"]]
    xs = range(len(names))
    ax.bar([x - 0.2 for x in xs], cases, width=0.4, label="cases")
    ax.bar([x + 0.2 for x in xs], failures, width=0.4, label="failures")
    ax.set_yscale("symlog")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
    ax.legend(fontsize=8)
    ax.set_title("acceptance criteria", fontsize=10)
    written.append(_save(fig, sibling(path, "criteria", ".png")))
    return written


def emit_pipeline(path: str | Path, result: PipelineResult) -> list[Path]:
    """Master certificate, ledger and claim tables, budget figures."""
    path = resolve_report_path(path)
    written = [write_json(path, result.to_json())]
    written.append(
        write_csv(
            sibling(path, "ledger", ".csv"), LEDGER_HEADER, ledger_rows(result.ledger)
        )
    )
    claim_rows = [
        [row.k, row.n, str(row.overlap), _frac(row.bound), row.passed]
        for row in result.claims
    ]
    written.append(
        write_csv(
            sibling(path, "claims", ".csv"),
            ("k", "n", "overlap", "bound", "passed"),
            claim_rows,
        )
    )
    census_rows = [
        [label, length, count]
        for label, census in result.order_census
        for length, count in census
    ]
    written.append(
        write_csv(
            sibling(path, "census", ".csv"),
            ("generator", "orbit_length", "cells"),
            census_rows,
        )
    )
    written.append(_budget_figure(result, sibling(path, "budget", ".png")))
    written.append(_census_figure(result, sibling(path, "census", ".png")))
    return written


def emit_schreier(path: str | Path, graph: SchreierGraph) -> list[Path]:
    """Orbit graph as JSON, edge table, DOT, and cycle histogram."""
    path = resolve_report_path(path)
    written = [write_json(path, graph.to_json())]
    edge_rows = [
        [graph.vertices[i], label, graph.vertices[j]]
        for i, label, j in graph.edges()
    ]
    written.append(
        write_csv(
            sibling(path, "edges", ".csv"), ("source", "label", "target"), edge_rows
        )
    )
    dot_path = sibling(path, "graph", ".dot")
    dot_path.write_text(schreier_dot(graph))
    written.append(dot_path)
    written.append(_cycle_figure(graph, sibling(path, "cycles", ".png")))
    return written


def emit_folner(path: str | Path, report: FolnerReport) -> list[Path]:
    """Ratio table as JSON, CSV, and a bar chart."""
    path = resolve_report_path(path)
    written = [write_json(path, report.to_json())]
    rows = [
        [row.index, row.size, label, _frac(ratio), _frac(row.max_ratio), row.flagged]
        for row in report.rows
        for label, ratio in row.ratios
    ]
    written.append(
        write_csv(
            sibling(path, "ratios", ".csv"),
            ("candidate", "size", "label", "ratio", "max_ratio", "flagged"),
            rows,
        )
    )
    written.append(_ratio_figure(report, sibling(path, "ratios", ".png")))
    return written
