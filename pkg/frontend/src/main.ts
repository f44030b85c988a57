// Entry point: resolve the API base URL, mount the app.
//
// The base URL is configurable three ways, first match wins:
//   1. window.DEBTVIZ_API_BASE set by the embedding page
//   2. an ?api=http://host:port query parameter
//   3. same origin (empty base)

import { ApiClient } from "./api";
import { App } from "./app";

declare global {
  interface Window {
    DEBTVIZ_API_BASE?: string;
  }
}

export function resolveBaseUrl(win: Window = window): string {
  if (win.DEBTVIZ_API_BASE) return win.DEBTVIZ_API_BASE;
  const fromQuery = new URLSearchParams(win.location.search).get("api");
  if (fromQuery) return fromQuery;
  return "";
}

const rootElement = document.getElementById("app");
if (rootElement !== null) {
  const app = new App(rootElement, new ApiClient(resolveBaseUrl()));
  void app.start();
}
