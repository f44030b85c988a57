// Issue dashboard: four pies straight from /stats/issues — summary labels,
// description labels, issue types and open/closed.

import { ApiError, LatestOnly } from "../api";
import { pieChart, type PieSlice } from "../charts";
import { clear, el } from "../dom";
import type { ViewContext } from "../context";
import type { ViewState } from "../state";
import type { IssueStats, SatdLabel } from "../types";
import { ALL_LABELS, LABEL_COLORS, LABEL_SHORT } from "../types";

// Rotating palette for the open-ended groupings (issue types are whatever
// the tracker uses).
const TYPE_PALETTE = [
  "#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756", "#72b7b2",
];

function labelSlices(counts: Record<SatdLabel, number>): PieSlice[] {
  return ALL_LABELS.map((label) => ({
    label,
    value: counts[label],
    color: LABEL_COLORS[label],
    display: LABEL_SHORT[label],
  }));
}

function dynamicSlices(counts: Record<string, number>): PieSlice[] {
  return Object.keys(counts).sort().map((key, i) => ({
    label: key,
    value: counts[key],
    color: TYPE_PALETTE[i % TYPE_PALETTE.length],
  }));
}

export function issuesView(ctx: ViewContext) {
  const gate = new LatestOnly();

  async function render(container: HTMLElement, state: ViewState):
      Promise<void> {
    const ticket = gate.begin();
    if (state.repoId === null) return;
    container.append(el("div", { class: "loading" }, "loading…"));
    let stats: IssueStats;
    try {
      stats = await ctx.api.issueStats(state.repoId);
    } catch (err) {
      if (!gate.isCurrent(ticket)) return;
      clear(container);
      const message = err instanceof ApiError
        ? err.message : "issue statistics unavailable";
      ctx.showError(message);
      container.append(el("div", { class: "error-state" }, message));
      return;
    }
    if (!gate.isCurrent(ticket)) return;
    clear(container);

    container.append(el("section", { class: "charts-grid" },
      el("div", { class: "pane", id: "summary-pane" },
        pieChart("Summaries by label",
          labelSlices(stats.by_label.SUMMARY))),
      el("div", { class: "pane", id: "description-pane" },
        pieChart("Descriptions by label",
          labelSlices(stats.by_label.DESCRIPTION))),
      el("div", { class: "pane", id: "type-pane" },
        pieChart("SATD issues by type",
          dynamicSlices(stats.by_issue_type))),
      el("div", { class: "pane", id: "open-closed-pane" },
        pieChart("SATD issues open vs closed", [
          { label: "OPEN", value: stats.by_open_closed.OPEN,
            color: "#e45756", display: "open" },
          { label: "CLOSED", value: stats.by_open_closed.CLOSED,
            color: "#54a24b", display: "closed" },
        ])),
    ));
  }

  return { render };
}
