// Directory heatmap: cells shaded by SATD density (SATD count / total
// comments) on a five-step scale, an optional single-label filter, and
// click-to-drill into subtrees.  The whole tree arrives in one payload;
// drilling just walks it, so the counts shown are always the server's.

import { ApiError, LatestOnly } from "../api";
import { clear, el } from "../dom";
import type { ViewContext } from "../context";
import type { ViewState } from "../state";
import type { HeatmapNode, SatdLabel } from "../types";
import { LABEL_SHORT, SATD_LABELS } from "../types";

// Density scale (documented in the README): step 0 is debt-free, then the
// share of comments that are SATD buckets at 10%, 25% and 50%.
export function densityStep(satd: number, total: number): number {
  if (total === 0 || satd === 0) return 0;
  const share = satd / total;
  if (share <= 0.1) return 1;
  if (share <= 0.25) return 2;
  if (share <= 0.5) return 3;
  return 4;
}

export function findNode(root: HeatmapNode, path: string):
    HeatmapNode | null {
  if (root.path === path) return root;
  for (const child of root.children) {
    if (path === child.path || path.startsWith(child.path + "/")) {
      return findNode(child, path);
    }
  }
  return null;
}

function countsLine(node: HeatmapNode): string {
  const parts = Object.entries(node.counts)
    .filter(([, n]) => n > 0)
    .map(([label, n]) => `${LABEL_SHORT[label as SatdLabel]} ${n}`);
  return parts.length ? parts.join(", ") : "no debt";
}

export function heatmapView(ctx: ViewContext) {
  const gate = new LatestOnly();
  let drillPath = "";
  let filter: SatdLabel | "" = "";
  let lastRepo: number | null = null;

  async function render(container: HTMLElement, state: ViewState):
      Promise<void> {
    const ticket = gate.begin();
    if (state.repoId === null) return;
    if (state.repoId !== lastRepo) {
      drillPath = "";
      lastRepo = state.repoId;
    }
    const repoId = state.repoId;
    container.append(el("div", { class: "loading" }, "loading…"));
    let root: HeatmapNode;
    try {
      root = await ctx.api.heatmap(repoId, filter || undefined);
    } catch (err) {
      if (!gate.isCurrent(ticket)) return;
      clear(container);
      const message = err instanceof ApiError
        ? err.message : "heatmap unavailable";
      ctx.showError(message);
      container.append(el("div", { class: "error-state" }, message));
      return;
    }
    if (!gate.isCurrent(ticket)) return;
    clear(container);

    const node = findNode(root, drillPath) ?? root;
    if (node !== findNode(root, drillPath)) drillPath = root.path;

    const redraw = () => {
      clear(container);
      void render(container, state);
    };

    const select = el("select", { id: "heatmap-filter" },
      el("option", { value: "" }, "all SATD labels"));
    for (const label of SATD_LABELS) {
      const opt = el("option", { value: label }, LABEL_SHORT[label]);
      if (label === filter) opt.setAttribute("selected", "selected");
      select.append(opt);
    }
    (select as HTMLSelectElement).value = filter;
    select.addEventListener("change", () => {
      filter = (select as HTMLSelectElement).value as SatdLabel | "";
      redraw();
    });

    const crumbs = el("nav", { class: "breadcrumbs" });
    const segments = node.path ? node.path.split("/") : [];
    const addCrumb = (text: string, target: string, last: boolean) => {
      if (last) {
        crumbs.append(el("span", { class: "crumb current" }, text));
        return;
      }
      const link = el("a", { class: "crumb", href: "#" }, text);
      link.addEventListener("click", (event) => {
        event.preventDefault();
        drillPath = target;
        redraw();
      });
      crumbs.append(link, el("span", { class: "crumb-sep" }, "/"));
    };
    addCrumb("root", "", segments.length === 0);
    segments.forEach((segment, i) => {
      addCrumb(segment, segments.slice(0, i + 1).join("/"),
        i === segments.length - 1);
    });

    const summary = el("div", {
      class: "heatmap-summary",
      "data-path": node.path,
      "data-satd": String(node.total_satd),
      "data-total": String(node.total_comments),
    }, `${node.total_satd} SATD in ${node.total_comments} comments` +
       ` — ${countsLine(node)}`);

    const grid = el("div", { class: "heatmap-grid" });
    if (node.children.length === 0) {
      grid.append(el("div", { class: "empty-state" },
        "no subdirectories here — use the file browser for files"));
    }
    for (const child of node.children) {
      const name = child.path.split("/").pop() ?? child.path;
      const step = densityStep(child.total_satd, child.total_comments);
      const cell = el("button", {
        class: `heatmap-cell density-${step}`,
        "data-path": child.path,
        "data-satd": String(child.total_satd),
        "data-total": String(child.total_comments),
        "data-density-step": String(step),
      },
        el("span", { class: "cell-name" }, name),
        el("span", { class: "cell-counts" },
          `${child.total_satd} / ${child.total_comments}`),
        el("span", { class: "cell-labels" }, countsLine(child)));
      cell.addEventListener("click", () => {
        drillPath = child.path;
        redraw();
      });
      grid.append(cell);
    }

    container.append(
      el("div", { class: "heatmap-controls" },
        el("label", { for: "heatmap-filter" }, "filter: "), select),
      crumbs, summary, grid);
  }

  return { render };
}
