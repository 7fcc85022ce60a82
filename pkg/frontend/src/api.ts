/** Thin fetch client for the node catalogue API.
 *
 * The UI never synthesizes data: every view renders exactly one (or more)
 * of these payloads. All requests accept an AbortSignal so in-flight
 * calls can be cancelled on navigation.
 */

import type { SearchQueryState } from "./state.js";
import { queryParams } from "./state.js";
import type {
  AccessRequestView,
  ApiError,
  DetailPayload,
  ListPage,
  NodeInfo,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly code: string = "error",
  ) {
    super(message);
  }
}

async function reject(response: Response): Promise<never> {
  let code = "error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as ApiError;
    if (body && body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiFailure(message, response.status, code);
}

export class CatalogueApi {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, { signal });
    if (!response.ok) {
      await reject(response);
    }
    return (await response.json()) as T;
  }

  node(signal?: AbortSignal): Promise<NodeInfo> {
    return this.get<NodeInfo>("/api/v1/node", signal);
  }

  datasets(query: SearchQueryState, signal?: AbortSignal): Promise<ListPage> {
    return this.get<ListPage>(`/api/v1/datasets?${queryParams(query)}`, signal);
  }

  detail(nodeId: string, localId: string, version: number, signal?: AbortSignal): Promise<DetailPayload> {
    return this.get<DetailPayload>(`/api/v1/datasets/${nodeId}/${localId}/${version}`, signal);
  }

  downloadUrl(nodeId: string, localId: string, version: number): string {
    return `${this.baseUrl}/api/v1/datasets/${nodeId}/${localId}/${version}/download`;
  }

  async submitRequest(
    nodeId: string,
    localId: string,
    version: number,
    contact: string,
    justification: string,
  ): Promise<AccessRequestView> {
    const response = await fetch(
      `${this.baseUrl}/api/v1/datasets/${nodeId}/${localId}/${version}/requests`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ contact, justification }),
      },
    );
    if (!response.ok) {
      await reject(response);
    }
    return (await response.json()) as AccessRequestView;
  }

  requestStatus(requestId: string, signal?: AbortSignal): Promise<AccessRequestView> {
    return this.get<AccessRequestView>(`/api/v1/requests/${requestId}`, signal);
  }
}

/** API base URL: `?api=` query parameter wins (and is remembered for the
 * session), then a `<meta name="api-base">` tag, then the dev default. */
export function resolveApiBase(win: Pick<Window, "location" | "sessionStorage" | "document">): string {
  const fromQuery = new URLSearchParams(win.location.search).get("api");
  if (fromQuery) {
    win.sessionStorage.setItem("api-base", fromQuery);
    return fromQuery.replace(/\/$/, "");
  }
  const remembered = win.sessionStorage.getItem("api-base");
  if (remembered) {
    return remembered.replace(/\/$/, "");
  }
  const meta = win.document.querySelector('meta[name="api-base"]');
  const fromMeta = meta?.getAttribute("content");
  if (fromMeta) {
    return fromMeta.replace(/\/$/, "");
  }
  return "http://127.0.0.1:8400";
}
