/** Hash router and event wiring.
 *
 * Navigation replaces the whole view; any API calls still in flight are
 * aborted first. All state changes go through the URL, so back/forward
 * and reload always reproduce the current view.
 */

import { ApiFailure, CatalogueApi } from "./api.js";
import {
  emptyQuery,
  formatHash,
  parseHash,
  type SearchQueryState,
  type View,
} from "./state.js";
import {
  renderDetail,
  renderError,
  renderLanding,
  renderList,
  renderLoading,
} from "./render.js";
import type { AccessRequestView, ContentKind } from "./types.js";

export class App {
  private controller: AbortController | null = null;
  private ownNodeId = "";
  private readonly onHashChange = (): void => void this.route();

  constructor(
    private readonly api: CatalogueApi,
    private readonly root: HTMLElement,
    private readonly win: Window,
  ) {}

  start(): void {
    this.win.addEventListener("hashchange", this.onHashChange);
    this.root.addEventListener("click", (event) => this.onClick(event));
    this.root.addEventListener("submit", (event) => void this.onSubmit(event));
    void this.route();
  }

  stop(): void {
    this.win.removeEventListener("hashchange", this.onHashChange);
    this.controller?.abort();
  }

  private navigate(view: View): void {
    this.win.location.hash = formatHash(view);
  }

  private currentView(): View {
    return parseHash(this.win.location.hash);
  }

  /** Abort anything in flight and return a fresh signal for this view. */
  private freshSignal(): AbortSignal {
    this.controller?.abort();
    this.controller = new AbortController();
    return this.controller.signal;
  }

  async route(): Promise<void> {
    const view = this.currentView();
    const signal = this.freshSignal();
    this.root.innerHTML = renderLoading();
    try {
      if (view.page === "landing") {
        const info = await this.api.node(signal);
        this.ownNodeId = info.node.node_id;
        this.root.innerHTML = renderLanding(info);
      } else if (view.page === "list") {
        const data = await this.api.datasets(view.query, signal);
        this.root.innerHTML = renderList(view.query, data);
      } else {
        if (!this.ownNodeId) {
          const info = await this.api.node(signal);
          this.ownNodeId = info.node.node_id;
        }
        const payload = await this.api.detail(view.nodeId, view.localId, view.version, signal);
        let request: AccessRequestView | null = null;
        if (view.requestId) {
          request = await this.api.requestStatus(view.requestId, signal);
        }
        this.root.innerHTML = renderDetail(payload, this.ownNodeId, view.lang, request);
      }
    } catch (error) {
      if (error instanceof DOMException && error.name === "AbortError") {
        return; // superseded by a newer navigation
      }
      const message =
        error instanceof ApiFailure
          ? `${error.code}: ${error.message}`
          : `the catalogue API at ${this.api.baseUrl} is unreachable (${String(error)})`;
      this.root.innerHTML = renderError(message);
    }
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest("button");
    if (!target) {
      return;
    }
    const view = this.currentView();
    if (target.dataset["retry"] !== undefined) {
      void this.route();
      return;
    }
    const kind = target.dataset["toggleKind"] as ContentKind | undefined;
    if (kind && view.page === "list") {
      const query = { ...view.query };
      query.kinds = query.kinds.includes(kind)
        ? query.kinds.filter((k) => k !== kind)
        : [...query.kinds, kind];
      query.page = 1;
      this.navigate({ page: "list", query });
      return;
    }
    if (target.dataset["page"] && view.page === "list") {
      const page = Number(target.dataset["page"]);
      if (Number.isInteger(page) && page >= 1) {
        this.navigate({ page: "list", query: { ...view.query, page } });
      }
      return;
    }
    if (target.dataset["lang"] !== undefined && view.page === "detail") {
      this.navigate({ ...view, lang: target.dataset["lang"] ?? "" });
    }
  }

  private async onSubmit(event: Event): Promise<void> {
    const form = event.target as HTMLFormElement;
    if (form.dataset["searchForm"] !== undefined) {
      event.preventDefault();
      const view = this.currentView();
      const previous: SearchQueryState = view.page === "list" ? view.query : emptyQuery();
      const data = new FormData(form);
      const categories = String(data.get("category") ?? "")
        .split(",")
        .map((c) => c.trim())
        .filter((c) => c.length > 0);
      this.navigate({
        page: "list",
        query: {
          ...previous,
          text: String(data.get("text") ?? ""),
          categories,
          languageTag: String(data.get("language_tag") ?? ""),
          page: 1,
        },
      });
      return;
    }
    if (form.dataset["requestForm"] !== undefined) {
      event.preventDefault();
      const view = this.currentView();
      if (view.page !== "detail") {
        return;
      }
      const data = new FormData(form);
      try {
        const request = await this.api.submitRequest(
          view.nodeId,
          view.localId,
          view.version,
          String(data.get("contact") ?? ""),
          String(data.get("justification") ?? ""),
        );
        this.navigate({ ...view, requestId: request.request_id });
        if (formatHash(this.currentView()) === this.win.location.hash) {
          void this.route(); // hash unchanged would not fire hashchange
        }
      } catch (error) {
        const message = error instanceof ApiFailure ? `${error.code}: ${error.message}` : String(error);
        this.root.innerHTML = renderError(message);
      }
    }
  }
}
