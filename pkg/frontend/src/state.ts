/** View state and its URL-hash encoding.
 *
 * Every view is fully described by the location hash, so any page can be
 * reached, reloaded, and shared by URL alone:
 *
 *   #/                                    landing
 *   #/datasets?text=…&kind=…&page=2       list
 *   #/datasets/unitn/uni-graph/1?lang=it  detail
 */

import { CONTENT_KINDS, type ContentKind } from "./types.js";

export interface SearchQueryState {
  text: string;
  kinds: ContentKind[];
  categories: string[];
  languageTag: string;
  page: number;
  pageSize: number;
}

export const DEFAULT_PAGE_SIZE = 20;

export function emptyQuery(): SearchQueryState {
  return { text: "", kinds: [], categories: [], languageTag: "", page: 1, pageSize: DEFAULT_PAGE_SIZE };
}

export type View =
  | { page: "landing" }
  | { page: "list"; query: SearchQueryState }
  | {
      page: "detail";
      nodeId: string;
      localId: string;
      version: number;
      lang: string;
      requestId: string;
    };

function isContentKind(value: string): value is ContentKind {
  return (CONTENT_KINDS as string[]).includes(value);
}

export function parseHash(hash: string): View {
  const cleaned = hash.replace(/^#/, "");
  const [path, queryString = ""] = cleaned.split("?", 2) as [string, string?];
  const segments = path.split("/").filter((s) => s.length > 0);
  const params = new URLSearchParams(queryString);

  if (segments.length === 0) {
    return { page: "landing" };
  }
  if (segments[0] !== "datasets") {
    return { page: "landing" };
  }
  if (segments.length === 1) {
    const query = emptyQuery();
    query.text = params.get("text") ?? "";
    query.kinds = params.getAll("kind").filter(isContentKind);
    query.categories = params.getAll("category").filter((c) => c.length > 0);
    query.languageTag = params.get("language_tag") ?? "";
    query.page = Math.max(1, Number(params.get("page") ?? "1") || 1);
    query.pageSize = Math.min(100, Math.max(1, Number(params.get("page_size") ?? DEFAULT_PAGE_SIZE) || DEFAULT_PAGE_SIZE));
    return { page: "list", query };
  }
  if (segments.length === 4) {
    const [, nodeId, localId, versionText] = segments as [string, string, string, string];
    const version = Number(versionText);
    if (Number.isInteger(version) && version >= 1) {
      return {
        page: "detail",
        nodeId,
        localId,
        version,
        lang: params.get("lang") ?? "",
        requestId: params.get("request_id") ?? "",
      };
    }
  }
  return { page: "landing" };
}

export function formatHash(view: View): string {
  if (view.page === "landing") {
    return "#/";
  }
  if (view.page === "list") {
    const params = new URLSearchParams();
    const q = view.query;
    if (q.text) params.set("text", q.text);
    for (const kind of q.kinds) params.append("kind", kind);
    for (const category of q.categories) params.append("category", category);
    if (q.languageTag) params.set("language_tag", q.languageTag);
    if (q.page !== 1) params.set("page", String(q.page));
    if (q.pageSize !== DEFAULT_PAGE_SIZE) params.set("page_size", String(q.pageSize));
    const query = params.toString();
    return query ? `#/datasets?${query}` : "#/datasets";
  }
  const params = new URLSearchParams();
  if (view.lang) params.set("lang", view.lang);
  if (view.requestId) params.set("request_id", view.requestId);
  const query = params.toString();
  const base = `#/datasets/${view.nodeId}/${view.localId}/${view.version}`;
  return query ? `${base}?${query}` : base;
}

export function detailHash(nodeId: string, localId: string, version: number): string {
  return formatHash({ page: "detail", nodeId, localId, version, lang: "", requestId: "" });
}

/** Query-string parameters for GET /api/v1/datasets. */
export function queryParams(query: SearchQueryState): URLSearchParams {
  const params = new URLSearchParams();
  if (query.text) params.set("text", query.text);
  for (const kind of query.kinds) params.append("kind", kind);
  for (const category of query.categories) params.append("category", category);
  if (query.languageTag) params.set("language_tag", query.languageTag);
  params.set("page", String(query.page));
  params.set("page_size", String(query.pageSize));
  return params;
}
