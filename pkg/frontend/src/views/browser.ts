// File browser and code viewer: a tree pane with per-entry SATD counts and
// a code pane where classified SATD comments are highlighted with label
// badges.  Clicking a SATD comment pulls /comments/{id}/keywords and
// underlines the keyword tokens inside the comment; a 409 (not classified
// yet) downgrades the badge to "pending" instead of raising the banner.

import { ApiError, LatestOnly } from "../api";
import { clear, el } from "../dom";
import type { ViewContext } from "../context";
import type { ViewState } from "../state";
import type {
  FileComment,
  FilePayload,
  KeywordSpan,
  SatdLabel,
  TreePayload,
} from "../types";
import { LABEL_SHORT } from "../types";

function isSatd(label: SatdLabel | null): boolean {
  return label !== null && label !== "NON_SATD";
}

function commentAt(comments: FileComment[], line: number):
    FileComment | null {
  for (const c of comments) {
    if (c.span.line_start <= line && line <= c.span.line_end) return c;
  }
  return null;
}

function badgeFor(comment: FileComment): HTMLElement {
  const pending = comment.label === null;
  const text = pending
    ? "pending"
    : LABEL_SHORT[comment.label as SatdLabel];
  const cls = pending
    ? "badge pending-badge"
    : `badge label-badge label-${comment.label}`;
  return el("span", {
    class: cls,
    "data-comment-id": String(comment.comment_id),
    "data-label": comment.label ?? "",
  }, text);
}

// Renders the file content line by line.  The slice of each line covered by
// a comment becomes a span; SATD and unclassified ones are clickable.
export function renderCodeViewer(
  payload: FilePayload,
  selected: number | null,
  onSelect: (commentId: number) => void,
): HTMLElement {
  const viewer = el("div", { class: "code-viewer" });
  const lines = payload.content.split("\n");
  lines.forEach((text, index) => {
    const lineNo = index + 1;
    const row = el("div", { class: "code-line", "data-line": String(lineNo) },
      el("span", { class: "line-no" }, String(lineNo)));
    const body = el("span", { class: "line-body" });
    const comment = commentAt(payload.comments, lineNo);
    if (comment === null) {
      body.textContent = text;
    } else {
      const lo = lineNo === comment.span.line_start
        ? comment.span.col_start : 0;
      const hi = lineNo === comment.span.line_end
        ? comment.span.col_end : text.length;
      if (lo > 0) body.append(text.slice(0, lo));
      const classes = ["comment-span"];
      if (isSatd(comment.label)) {
        classes.push("satd-highlight", `label-${comment.label}`);
      } else if (comment.label === null) {
        classes.push("pending");
      } else {
        classes.push("non-satd");
      }
      if (comment.comment_id === selected) classes.push("selected");
      const span = el("span", {
        class: classes.join(" "),
        "data-comment-id": String(comment.comment_id),
      }, text.slice(lo, hi));
      if (comment.label === null || isSatd(comment.label)) {
        span.addEventListener("click", () =>
          onSelect(comment.comment_id));
      }
      body.append(span);
      if (hi < text.length) body.append(text.slice(hi));
      if (lineNo === comment.span.line_start &&
          (isSatd(comment.label) || comment.label === null)) {
        body.append(badgeFor(comment));
      }
    }
    row.append(body);
    viewer.append(row);
  });
  return viewer;
}

// Wraps every occurrence of the keyword tokens inside the comment's spans
// in <mark>, leaving the rest of the text untouched.
export function markKeywordTokens(
  viewer: HTMLElement,
  commentId: number,
  spans: KeywordSpan[],
): void {
  const tokens = new Set<string>();
  for (const span of spans) {
    for (const token of span.text.toLowerCase().match(/[a-z0-9_]+/g) ?? []) {
      tokens.add(token);
    }
  }
  if (tokens.size === 0) return;
  const targets = viewer.querySelectorAll(
    `.comment-span[data-comment-id="${commentId}"]`);
  targets.forEach((target) => {
    const text = target.textContent ?? "";
    clear(target);
    let rest = text;
    const word = /[A-Za-z0-9_]+/g;
    let cursor = 0;
    let match: RegExpExecArray | null;
    while ((match = word.exec(rest)) !== null) {
      if (!tokens.has(match[0].toLowerCase())) continue;
      if (match.index > cursor) {
        target.append(rest.slice(cursor, match.index));
      }
      target.append(el("mark", { class: "kw-token" }, match[0]));
      cursor = match.index + match[0].length;
    }
    if (cursor < rest.length) target.append(rest.slice(cursor));
  });
}

export function keywordPopover(spans: KeywordSpan[]): HTMLElement {
  const list = el("ol", { class: "keyword-list" });
  for (const span of spans) {
    list.append(el("li", {
      "data-token-start": String(span.token_start),
      "data-token-end": String(span.token_end),
      "data-score": String(span.score),
    },
      el("span", { class: "kw-text" }, span.text),
      el("span", { class: "kw-score" }, span.score.toFixed(2))));
  }
  if (spans.length === 0) {
    list.append(el("li", { class: "kw-none" }, "no keywords"));
  }
  return el("div", { class: "keyword-popover" },
    el("h4", {}, "keywords"), list);
}

export function browserView(ctx: ViewContext) {
  const gate = new LatestOnly();

  async function render(container: HTMLElement, state: ViewState):
      Promise<void> {
    const ticket = gate.begin();
    if (state.repoId === null) return;
    const repoId = state.repoId;
    container.append(el("div", { class: "loading" }, "loading…"));

    let tree: TreePayload;
    let file: FilePayload | null = null;
    try {
      const wants: [Promise<TreePayload>, Promise<FilePayload> | null] = [
        ctx.api.tree(repoId, state.browserPath),
        state.selectedFile !== null
          ? ctx.api.file(repoId, state.selectedFile) : null,
      ];
      tree = await wants[0];
      file = wants[1] !== null ? await wants[1] : null;
    } catch (err) {
      if (!gate.isCurrent(ticket)) return;
      clear(container);
      const message = err instanceof ApiError
        ? err.message : "file listing unavailable";
      ctx.showError(message);
      container.append(el("div", { class: "error-state" }, message));
      return;
    }
    if (!gate.isCurrent(ticket)) return;
    clear(container);

    // -- tree pane ----------------------------------------------------
    const treePane = el("div", { class: "pane tree-pane" },
      el("div", { class: "tree-path" },
        tree.path === "" ? "/" : `/${tree.path}`));
    const listing = el("ul", { class: "tree-listing" });
    if (tree.path !== "") {
      const up = el("li", { class: "tree-entry up" },
        el("a", { href: "#" }, ".."));
      up.querySelector("a")!.addEventListener("click", (event) => {
        event.preventDefault();
        const parent = tree.path.includes("/")
          ? tree.path.slice(0, tree.path.lastIndexOf("/")) : "";
        ctx.store.patch({ browserPath: parent });
      });
      listing.append(up);
    }
    for (const entry of tree.entries) {
      const row = el("li", {
        class: `tree-entry ${entry.is_dir ? "dir" : "file"}`,
        "data-name": entry.name,
        "data-path": entry.path,
        "data-satd": String(entry.satd_total),
        "data-total": String(entry.total_comments),
      });
      const link = el("a", { href: "#" },
        entry.is_dir ? `${entry.name}/` : entry.name);
      link.addEventListener("click", (event) => {
        event.preventDefault();
        if (entry.is_dir) {
          ctx.store.patch({ browserPath: entry.path });
        } else {
          ctx.store.patch({ selectedFile: entry.path });
        }
      });
      row.append(link, el("span", {
        class: "entry-counts",
        "data-satd": String(entry.satd_total),
        "data-total": String(entry.total_comments),
      }, `${entry.satd_total} / ${entry.total_comments}`));
      listing.append(row);
    }
    treePane.append(listing);

    // -- file pane ----------------------------------------------------
    const filePane = el("div", { class: "pane file-pane" });
    if (file === null) {
      filePane.append(el("div", { class: "empty-state" },
        "select a file to inspect its comments"));
    } else {
      filePane.append(el("div", { class: "file-path" }, file.path));
      const viewer = renderCodeViewer(file, state.selectedComment,
        (commentId) => ctx.store.patch({ selectedComment: commentId }));
      filePane.append(viewer);

      if (state.selectedComment !== null &&
          file.comments.some(
            (c) => c.comment_id === state.selectedComment)) {
        const commentId = state.selectedComment;
        try {
          const spans = await ctx.api.keywords(commentId);
          if (!gate.isCurrent(ticket)) return;
          markKeywordTokens(viewer, commentId, spans);
          const anchor = viewer.querySelector(
            `.comment-span[data-comment-id="${commentId}"]`);
          anchor?.closest(".code-line")?.after(keywordPopover(spans));
        } catch (err) {
          if (!gate.isCurrent(ticket)) return;
          if (err instanceof ApiError && err.status === 409) {
            // Raced an unfinished classification: show it as pending.
            const badge = viewer.querySelector(
              `.badge[data-comment-id="${commentId}"]`);
            if (badge) {
              badge.textContent = "pending";
              badge.className = "badge pending-badge";
            }
          } else {
            ctx.showError(err instanceof ApiError
              ? err.message : "keywords unavailable");
          }
        }
      }
    }

    container.append(el("div", { class: "browser-layout" },
      treePane, filePane));
  }

  return { render };
}
