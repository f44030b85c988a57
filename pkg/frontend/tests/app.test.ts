import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { App } from "../src/app";
import { MockApi } from "./mock_api";
import { flush, q, qa, text } from "./support";

function mount(mock: MockApi): { app: App; root: HTMLElement } {
  const root = document.createElement("div");
  document.body.append(root);
  const app = new App(root, new ApiClient("", mock.fetch));
  return { app, root };
}

describe("application shell", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("shows the model version and queue depth from /health", async () => {
    const mock = new MockApi();
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    const chip = q(root, "#health-chip");
    expect(chip.textContent).toBe("model fixture-1 — 1 queued");
    expect(chip.getAttribute("data-queue-depth")).toBe("1");
  });

  it("lists the served repositories and selects the first", async () => {
    const mock = new MockApi();
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    const options = qa(root, "#repo-select option");
    expect(options.map((o) => o.textContent)).toEqual(["demo", "pending"]);
    expect(options.map((o) => o.getAttribute("value"))).toEqual(["1", "2"]);
    expect((q(root, "#repo-select") as HTMLSelectElement).value).toBe("1");
    expect(app.store.get().repoId).toBe(1);
    // the comments dashboard rendered for it
    expect(q(root, "#label-pane .legend-value")).toBeTruthy();
  });

  it("switches views from the tab bar", async () => {
    const mock = new MockApi();
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    expect(qa(root, "#tabs .tab").map((t) => t.textContent))
      .toEqual(["Comments", "Issues", "Heatmap", "Files"]);
    expect(q(root, ".tab.active").getAttribute("data-view"))
      .toBe("COMMENTS_DASH");

    (q(root, '.tab[data-view="HEATMAP"]') as HTMLElement).click();
    await flush();
    expect(q(root, ".tab.active").getAttribute("data-view")).toBe("HEATMAP");
    expect(q(root, ".heatmap-summary")).toBeTruthy();
  });

  it("changing the repository re-renders the active view", async () => {
    const mock = new MockApi();
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    const select = q(root, "#repo-select") as HTMLSelectElement;
    select.value = "2";
    select.dispatchEvent(new Event("change"));
    await flush();

    expect(app.store.get().repoId).toBe(2);
    expect(text(root, "#label-pane .empty-state"))
      .toBe("no classified items yet");
  });

  it("registers a repository and reports the scan state", async () => {
    const mock = new MockApi();
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    (q(root, "#repo-name") as HTMLInputElement).value = "demo";
    (q(root, "#repo-path") as HTMLInputElement).value = "/repos-root/demo";
    q(root, "#add-repo-form").dispatchEvent(new Event("submit"));
    await flush();

    expect(mock.calls).toContain("POST /repos name=demo");
    const banner = q(root, "#banner");
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(text(banner, ".banner-text"))
      .toBe("scan queued for repository 1");
    // the banner can be dismissed again
    (q(banner, ".banner-dismiss") as HTMLElement).click();
    expect(banner.classList.contains("hidden")).toBe(true);
  });

  it("shows the served error when registration is rejected", async () => {
    const mock = new MockApi({
      "POST /repos name=broken": {
        status: 400,
        body: { detail: "path is not a git repository" },
      },
    });
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    (q(root, "#repo-name") as HTMLInputElement).value = "broken";
    (q(root, "#repo-path") as HTMLInputElement).value = "/nowhere";
    q(root, "#add-repo-form").dispatchEvent(new Event("submit"));
    await flush();

    expect(text(root, "#banner .banner-text"))
      .toBe("path is not a git repository");
  });

  it("handles an empty repository list", async () => {
    const mock = new MockApi({
      "GET /repos": { status: 200, body: { repos: [] } },
    });
    const { app, root } = mount(mock);
    await app.start();
    await flush();

    expect(text(root, "#repo-select option")).toBe("no repositories yet");
    expect(app.store.get().repoId).toBeNull();
    expect(text(root, "#view .empty-state"))
      .toBe("register a repository to begin");
  });

  it("reports an unreachable service", async () => {
    const root = document.createElement("div");
    document.body.append(root);
    const api = new ApiClient("", async () => {
      throw new Error("connection refused");
    });
    const app = new App(root, api);
    await app.start();
    await flush();

    expect(text(root, "#health-chip")).toBe("service unreachable");
    expect(text(root, "#banner .banner-text"))
      .toBe("cannot list repositories");
  });
});
