"""Render a static report for one repository: CSV tables plus PNG charts.

Everything is derived from datastore queries; the renderer never aggregates
on its own, so the CSV numbers always match what the HTTP API would serve.
Figures are drawn with the Agg backend — no display required.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import NoSnapshots
from .extractor import CommentKind
from .labels import LABELS, SATD_LABELS, SatdLabel
from .store import Datastore, HeatmapNode, TargetKind

_LABEL_COLORS = {
    SatdLabel.NON_SATD: "#9e9e9e",
    SatdLabel.CODE_DESIGN_DEBT: "#d62728",
    SatdLabel.TEST_DEBT: "#ff7f0e",
    SatdLabel.DOCUMENTATION_DEBT: "#1f77b4",
    SatdLabel.REQUIREMENT_DEBT: "#9467bd",
}


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _pie(path: str, title: str, counts: dict) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    nonzero = [(k, n) for k, n in counts.items() if n > 0]
    if nonzero:
        names = [k.value if hasattr(k, "value") else str(k)
                 for k, _ in nonzero]
        colors = [_LABEL_COLORS.get(k, None) for k, _ in nonzero]
        if any(c is None for c in colors):
            colors = None
        ax.pie([n for _, n in nonzero], labels=names, colors=colors,
               autopct="%d%%", startangle=90)
    else:
        ax.text(0.5, 0.5, "no data", ha="center", va="center")
        ax.set_axis_off()
    ax.set_title(title)
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _flatten(node: HeatmapNode) -> list[HeatmapNode]:
    out = [node]
    for child in node.children:
        out.extend(_flatten(child))
    return out


def render_report(store: Datastore, repo_id: int, out_dir: str) -> list[str]:
    """Write all report files for the repo into out_dir.

    Returns the paths written, in a stable order.  Timeline outputs are
    skipped when the repo has no scanned snapshots.
    """
    repo = store.get_repo(repo_id)
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def out(name: str) -> str:
        path = os.path.join(out_dir, name)
        written.append(path)
        return path

    # --- comment label distribution -------------------------------------
    labels = store.stats_labels(repo_id, kinds={TargetKind.COMMENT})
    _write_csv(out("comment_labels.csv"), ["label", "count"],
               [[lab.value, labels[lab]] for lab in LABELS])
    _pie(out("comment_labels.png"),
         f"{repo.name}: comments by label", labels)

    # --- comment kinds of the SATD population ---------------------------
    kinds = store.stats_comment_kinds(repo_id)
    _write_csv(out("satd_comment_kinds.csv"), ["kind", "count"],
               [[k.value, kinds[k]] for k in CommentKind])
    _pie(out("satd_comment_kinds.png"),
         f"{repo.name}: SATD comments by kind", kinds)

    # --- issue stats ----------------------------------------------------
    issues = store.stats_issues(repo_id)
    issue_rows = []
    for fld, by_label in issues["by_label"].items():
        for lab in LABELS:
            issue_rows.append([fld.value, lab.value, by_label[lab]])
    _write_csv(out("issue_labels.csv"), ["field", "label", "count"],
               issue_rows)

    # --- per-directory density ------------------------------------------
    tree = store.heatmap(repo_id)
    flat = _flatten(tree)
    heat_rows = []
    for node in flat:
        row = [node.path or ".", node.total_comments, node.total_satd]
        row.extend(node.counts[lab] for lab in SATD_LABELS)
        heat_rows.append(row)
    _write_csv(out("directory_density.csv"),
               ["path", "total_comments", "total_satd"]
               + [lab.value for lab in SATD_LABELS],
               heat_rows)

    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.45 * len(flat))))
    names = [node.path or "." for node in flat]
    ratios = [node.total_satd / node.total_comments if node.total_comments
              else 0.0 for node in flat]
    ax.barh(names, ratios, color="#d62728")
    ax.set_xlim(0, 1)
    ax.set_xlabel("SATD share of comments")
    ax.set_title(f"{repo.name}: debt density by directory")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(out("directory_density.png"), dpi=100)
    plt.close(fig)

    # --- timeline -------------------------------------------------------
    try:
        points = store.timeline(repo_id)
    except NoSnapshots:
        points = None
    if points is not None:
        _write_csv(out("timeline.csv"),
                   ["commit_id", "timestamp", "total_comments"]
                   + [lab.value for lab in SATD_LABELS],
                   [[p.commit_id, p.timestamp, p.total_comments]
                    + [p.counts[lab] for lab in SATD_LABELS]
                    for p in points])
        fig, ax = plt.subplots(figsize=(8, 5))
        xs = [p.timestamp for p in points]
        for lab in SATD_LABELS:
            ax.plot(xs, [p.counts[lab] for p in points], marker="o",
                    label=lab.value, color=_LABEL_COLORS[lab])
        ax.plot(xs, [p.total_comments for p in points], marker=".",
                label="total comments", color="#9e9e9e", linestyle="--")
        ax.set_xlabel("commit timestamp")
        ax.set_ylabel("count")
        ax.set_title(f"{repo.name}: SATD over sampled history")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out("timeline.png"), dpi=100)
        plt.close(fig)

    return written
