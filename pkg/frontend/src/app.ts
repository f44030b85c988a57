// Application shell: header with health chip and repo picker, the
// add-repository form (the dashboard's only write), view tabs, error
// banner, and the active-view router.

import { ApiClient, ApiError } from "./api";
import { clear, el } from "./dom";
import { Store, VIEW_TITLES, type ViewName, type ViewState } from "./state";
import type { View, ViewContext } from "./context";
import { browserView } from "./views/browser";
import { commentsView } from "./views/comments";
import { heatmapView } from "./views/heatmap";
import { issuesView } from "./views/issues";

const VIEW_ORDER: ViewName[] = [
  "COMMENTS_DASH", "ISSUES_DASH", "HEATMAP", "BROWSER",
];

export class App {
  readonly store: Store;
  private api: ApiClient;
  private views: Record<ViewName, View>;
  private root: HTMLElement;
  private banner!: HTMLElement;
  private main!: HTMLElement;
  private repoSelect!: HTMLSelectElement;
  private healthChip!: HTMLElement;

  constructor(root: HTMLElement, api: ApiClient, store?: Store) {
    this.root = root;
    this.api = api;
    this.store = store ?? new Store();
    const ctx: ViewContext = {
      api: this.api,
      store: this.store,
      showError: (message) => this.showError(message),
    };
    this.views = {
      COMMENTS_DASH: commentsView(ctx),
      ISSUES_DASH: issuesView(ctx),
      HEATMAP: heatmapView(ctx),
      BROWSER: browserView(ctx),
    };
  }

  async start(): Promise<void> {
    this.buildShell();
    this.store.subscribe((state) => {
      void this.renderView(state);
    });
    await Promise.all([this.refreshHealth(), this.refreshRepos(true)]);
  }

  private buildShell(): void {
    clear(this.root);
    this.banner = el("div", { id: "banner", class: "banner hidden" });
    this.healthChip = el("span", { id: "health-chip", class: "chip" });
    this.repoSelect = el("select", { id: "repo-select" });
    this.repoSelect.addEventListener("change", () => {
      const value = this.repoSelect.value;
      this.store.patch({ repoId: value === "" ? null : Number(value) });
    });

    const form = el("form", { id: "add-repo-form" },
      el("input", { id: "repo-name", placeholder: "name" }),
      el("input", { id: "repo-path", placeholder: "/path/to/repo" }),
      el("button", { type: "submit" }, "add repository"));
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.addRepo();
    });

    const tabs = el("nav", { id: "tabs" });
    for (const view of VIEW_ORDER) {
      const tab = el("button", {
        class: "tab",
        "data-view": view,
      }, VIEW_TITLES[view]);
      tab.addEventListener("click", () => {
        this.store.patch({ view });
      });
      tabs.append(tab);
    }

    this.main = el("main", { id: "view" });
    this.root.append(
      el("header", {},
        el("h1", {}, "debtviz"),
        this.healthChip,
        el("div", { class: "repo-row" },
          el("label", { for: "repo-select" }, "repository: "),
          this.repoSelect,
          form)),
      tabs,
      this.banner,
      this.main);
  }

  showError(message: string): void {
    this.banner.textContent = "";
    this.banner.append(
      el("span", { class: "banner-text" }, message),
      el("button", { class: "banner-dismiss" }, "dismiss"));
    this.banner.querySelector("button")!.addEventListener("click", () => {
      this.clearError();
    });
    this.banner.classList.remove("hidden");
  }

  clearError(): void {
    this.banner.classList.add("hidden");
    this.banner.textContent = "";
  }

  private async refreshHealth(): Promise<void> {
    try {
      const health = await this.api.health();
      this.healthChip.textContent = health.model_version === null
        ? `no model — ${health.queue_depth} queued`
        : `model ${health.model_version} — ${health.queue_depth} queued`;
      this.healthChip.setAttribute("data-queue-depth",
        String(health.queue_depth));
    } catch {
      this.healthChip.textContent = "service unreachable";
    }
  }

  private async refreshRepos(selectFirst: boolean): Promise<void> {
    let payload;
    try {
      payload = await this.api.listRepos();
    } catch (err) {
      this.showError(err instanceof ApiError
        ? err.message : "cannot list repositories");
      return;
    }
    clear(this.repoSelect);
    if (payload.repos.length === 0) {
      this.repoSelect.append(el("option", { value: "" },
        "no repositories yet"));
      this.store.patch({ repoId: null });
      return;
    }
    for (const repo of payload.repos) {
      this.repoSelect.append(el("option", {
        value: String(repo.repo_id),
      }, repo.name));
    }
    const current = this.store.get().repoId;
    const keep = payload.repos.some((r) => r.repo_id === current);
    if (keep) {
      this.repoSelect.value = String(current);
    } else if (selectFirst) {
      const first = payload.repos[0].repo_id;
      this.repoSelect.value = String(first);
      this.store.patch({ repoId: first });
    }
  }

  private async addRepo(): Promise<void> {
    const name =
      (this.root.querySelector("#repo-name") as HTMLInputElement).value;
    const path =
      (this.root.querySelector("#repo-path") as HTMLInputElement).value;
    try {
      const created = await this.api.registerRepo(name, path);
      await this.refreshRepos(false);
      this.repoSelect.value = String(created.repo_id);
      this.store.patch({ repoId: created.repo_id });
      this.showError(`scan ${created.state.toLowerCase()} for ` +
        `repository ${created.repo_id}`);
    } catch (err) {
      this.showError(err instanceof ApiError
        ? err.message : "registering the repository failed");
    }
  }

  private async renderView(state: ViewState): Promise<void> {
    for (const tab of this.root.querySelectorAll("#tabs .tab")) {
      tab.classList.toggle("active",
        tab.getAttribute("data-view") === state.view);
    }
    clear(this.main);
    if (state.repoId === null) {
      this.main.append(el("div", { class: "empty-state" },
        "register a repository to begin"));
      return;
    }
    await this.views[state.view].render(this.main, state);
  }
}
