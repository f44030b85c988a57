import type { ApiClient } from "./api";
import type { Store } from "./state";

// Shared handles every view gets: the API client, the view-state store and
// the error banner hook.
export interface ViewContext {
  api: ApiClient;
  store: Store;
  showError(message: string): void;
}

export interface View {
  render(container: HTMLElement, state: import("./state").ViewState):
    Promise<void>;
}
