// Comments dashboard: SATD label pie (NON_SATD behind a toggle), comment
// kind pie, and the per-snapshot timeline.  Every number shown comes
// straight out of /stats/comments and /timeline.

import { ApiError, LatestOnly } from "../api";
import { lineChart, pieChart, type PieSlice, type Series } from "../charts";
import { clear, el } from "../dom";
import type { ViewContext } from "../context";
import type { ViewState } from "../state";
import type { CommentStats, TimelinePayload } from "../types";
import {
  COMMENT_KINDS,
  LABEL_COLORS,
  LABEL_SHORT,
  SATD_LABELS,
} from "../types";

const KIND_COLORS: Record<string, string> = {
  INLINE: "#4c78a8",
  MULTI_LINE: "#f58518",
  BLOCK: "#54a24b",
  DOC_BLOCK: "#b279a2",
};

function labelSlices(stats: CommentStats, includeNonSatd: boolean):
    PieSlice[] {
  const slices: PieSlice[] = SATD_LABELS.map((label) => ({
    label,
    value: stats.by_label[label],
    color: LABEL_COLORS[label],
    display: LABEL_SHORT[label],
  }));
  if (includeNonSatd) {
    slices.push({
      label: "NON_SATD",
      value: stats.by_label.NON_SATD,
      color: LABEL_COLORS.NON_SATD,
      display: LABEL_SHORT.NON_SATD,
    });
  }
  return slices;
}

function timelineSeries(timeline: TimelinePayload): Series[] {
  const series: Series[] = SATD_LABELS.map((label) => ({
    name: label,
    color: LABEL_COLORS[label],
    points: timeline.points.map((p) => ({
      x: p.timestamp,
      y: p.counts[label],
      commit: p.commit_id,
    })),
  }));
  series.push({
    name: "total comments",
    color: "#666f77",
    points: timeline.points.map((p) => ({
      x: p.timestamp,
      y: p.total_comments,
      commit: p.commit_id,
    })),
  });
  return series;
}

export function commentsView(ctx: ViewContext) {
  const gate = new LatestOnly();

  async function render(container: HTMLElement, state: ViewState):
      Promise<void> {
    const ticket = gate.begin();
    if (state.repoId === null) return;
    const repoId = state.repoId;
    container.append(el("div", { class: "loading" }, "loading…"));
    let stats: CommentStats;
    let timeline: TimelinePayload;
    try {
      [stats, timeline] = await Promise.all([
        ctx.api.commentStats(repoId),
        ctx.api.timeline(repoId),
      ]);
    } catch (err) {
      if (!gate.isCurrent(ticket)) return;
      clear(container);
      const message = err instanceof ApiError
        ? err.message : "comment statistics unavailable";
      ctx.showError(message);
      container.append(el("div", { class: "error-state" }, message));
      return;
    }
    if (!gate.isCurrent(ticket)) return;
    clear(container);

    const labelPane = el("div", { class: "pane", id: "label-pane" });
    const toggle = el("input", { type: "checkbox", id: "non-satd-toggle" });
    const drawLabelPie = () => {
      clear(labelPane);
      labelPane.append(pieChart(
        "SATD by label",
        labelSlices(stats, (toggle as HTMLInputElement).checked)));
    };
    toggle.addEventListener("change", drawLabelPie);
    drawLabelPie();

    const kindPie = pieChart("SATD by comment kind", COMMENT_KINDS.map(
      (kind) => ({
        label: kind,
        value: stats.by_comment_kind[kind],
        color: KIND_COLORS[kind],
        display: kind.toLowerCase().replace("_", " "),
      })));

    const points = [...timeline.points]
      .sort((a, b) => a.timestamp - b.timestamp);
    const chart = lineChart("SATD over time",
      timelineSeries({ points }));

    container.append(
      el("section", { class: "charts-grid" },
        labelPane,
        el("label", { class: "toggle-row", for: "non-satd-toggle" },
          toggle, "include non-SATD comments"),
        el("div", { class: "pane" }, kindPie)),
      el("section", { class: "pane timeline-pane" }, chart),
    );
  }

  return { render };
}
