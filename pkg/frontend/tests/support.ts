// Small shared helpers for the DOM tests.

import { ApiClient } from "../src/api";
import type { ViewContext } from "../src/context";
import { initialState, Store, type ViewState } from "../src/state";
import type { MockApi } from "./mock_api";

// Everything in the mock resolves in microtasks, so one macrotask hop lets
// any chain of awaits run to completion.
export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function q(root: ParentNode, selector: string): Element {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`selector matched nothing: ${selector}`);
  return node;
}

export function qa(root: ParentNode, selector: string): Element[] {
  return [...root.querySelectorAll(selector)];
}

export function text(root: ParentNode, selector: string): string {
  return q(root, selector).textContent ?? "";
}

export interface TestCtx {
  ctx: ViewContext;
  store: Store;
  errors: string[];
}

export function makeCtx(mock: MockApi): TestCtx {
  const store = new Store();
  const errors: string[] = [];
  const ctx: ViewContext = {
    api: new ApiClient("", mock.fetch),
    store,
    showError: (message) => errors.push(message),
  };
  return { ctx, store, errors };
}

export function stateWith(changes: Partial<ViewState>): ViewState {
  return { ...initialState(), repoId: 1, ...changes };
}
