// Dashboard view state: which repo, which view, where in the file browser.
// A tiny observable store — no framework, subscribers re-render on patch.

export type ViewName =
  | "COMMENTS_DASH"
  | "ISSUES_DASH"
  | "HEATMAP"
  | "BROWSER";

export const VIEW_TITLES: Record<ViewName, string> = {
  COMMENTS_DASH: "Comments",
  ISSUES_DASH: "Issues",
  HEATMAP: "Heatmap",
  BROWSER: "Files",
};

export interface ViewState {
  repoId: number | null;
  view: ViewName;
  browserPath: string;
  selectedFile: string | null;
  // Invariant: non-null only while selectedFile is set; changing the file
  // (or the repo) always clears it, so the selection can never point into
  // a file that is no longer shown.
  selectedComment: number | null;
}

export type Listener = (state: ViewState) => void;

export function initialState(): ViewState {
  return {
    repoId: null,
    view: "COMMENTS_DASH",
    browserPath: "",
    selectedFile: null,
    selectedComment: null,
  };
}

export class Store {
  private state: ViewState;
  private listeners: Listener[] = [];

  constructor(state?: ViewState) {
    this.state = state ?? initialState();
  }

  get(): ViewState {
    return { ...this.state };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  patch(changes: Partial<ViewState>): void {
    const next = { ...this.state, ...changes };
    if (next.repoId !== this.state.repoId) {
      // A new repository invalidates every path-dependent selection.
      next.browserPath = changes.browserPath ?? "";
      next.selectedFile = changes.selectedFile ?? null;
      next.selectedComment = null;
    }
    if (next.selectedFile !== this.state.selectedFile &&
        changes.selectedComment === undefined) {
      next.selectedComment = null;
    }
    if (next.selectedFile === null) {
      next.selectedComment = null;
    }
    this.state = next;
    for (const listener of [...this.listeners]) {
      listener(this.get());
    }
  }
}
