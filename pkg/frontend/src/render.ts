/** Pure view rendering: (state, API payload) → HTML string.
 *
 * No data is synthesized here; everything shown comes from the payloads.
 * Interactive elements carry data- attributes that app.ts wires up.
 */

import type { SearchQueryState } from "./state.js";
import { detailHash } from "./state.js";
import type {
  AccessRequestView,
  DetailPayload,
  LinkEntry,
  ListPage,
  NodeInfo,
} from "./types.js";
import { CONTENT_KINDS, refLabel } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const esc = escapeHtml;

/** Pick the text for a language: requested tag, then `en`, then the first
 * tag in sorted order. */
export function pickLanguage(texts: Record<string, string>, wanted: string): [string, string] {
  const tags = Object.keys(texts).sort();
  if (wanted && texts[wanted] !== undefined) {
    return [wanted, texts[wanted]];
  }
  if (texts["en"] !== undefined) {
    return ["en", texts["en"]];
  }
  const first = tags[0];
  return first !== undefined ? [first, texts[first] ?? ""] : ["", ""];
}

export function renderLanding(info: NodeInfo): string {
  const descriptions = Object.entries(info.node.domain_description)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([tag, text]) => `<p class="description" lang="${esc(tag)}"><em>${esc(tag)}</em> ${esc(text)}</p>`)
    .join("");
  const counts = CONTENT_KINDS.map(
    (kind) => `
      <a class="count-card" href="#/datasets?kind=${kind}">
        <span class="count" data-kind="${kind}">${info.counts[kind] ?? 0}</span>
        <span class="kind">${kind}</span>
      </a>`,
  ).join("");
  return `
    <section class="landing">
      <h1>${esc(info.node.name)}</h1>
      <p class="publisher">published by ${esc(info.node.publisher)} · <code>${esc(info.node.node_id)}</code></p>
      ${descriptions}
      <div class="counts">${counts}</div>
      <p><a class="browse" href="#/datasets">Browse all datasets →</a></p>
    </section>`;
}

function kindChips(query: SearchQueryState): string {
  return CONTENT_KINDS.map((kind) => {
    const active = query.kinds.includes(kind);
    return `<button class="chip${active ? " active" : ""}" data-toggle-kind="${kind}">${kind}</button>`;
  }).join("");
}

export function renderList(query: SearchQueryState, data: ListPage): string {
  const rows = data.items
    .map((item) => {
      const [, title] = pickLanguage(item.title, query.languageTag);
      const href = detailHash(item.ref.node_id, item.ref.local_id, item.ref.version);
      const categories = item.categories.map((c) => `<span class="tag">${esc(c)}</span>`).join(" ");
      return `
        <tr>
          <td><a href="${href}">${esc(title)}</a></td>
          <td><span class="kind">${esc(item.kind)}</span></td>
          <td>${categories}</td>
          <td><code>${esc(refLabel(item.ref))}</code></td>
        </tr>`;
    })
    .join("");
  const lastPage = Math.max(1, Math.ceil(data.total / data.page_size));
  const categories = query.categories.map((c) => esc(c)).join(", ");
  return `
    <section class="list">
      <form class="search" data-search-form>
        <input name="text" type="search" placeholder="Search datasets…" value="${esc(query.text)}" />
        <input name="category" type="text" placeholder="categories (comma separated)" value="${categories}" />
        <input name="language_tag" type="text" placeholder="language tag" value="${esc(query.languageTag)}" />
        <button type="submit">Search</button>
      </form>
      <div class="chips">${kindChips(query)}</div>
      <table class="results">
        <thead><tr><th>Title</th><th>Kind</th><th>Categories</th><th>Dataset</th></tr></thead>
        <tbody>${rows || '<tr><td colspan="4" class="empty">no datasets match</td></tr>'}</tbody>
      </table>
      <footer class="paging">
        <button data-page="${data.page - 1}" ${data.page <= 1 ? "disabled" : ""}>← previous</button>
        <span>page ${data.page} of ${lastPage} · ${data.total} dataset(s)</span>
        <button data-page="${data.page + 1}" ${data.page >= lastPage ? "disabled" : ""}>next →</button>
      </footer>
    </section>`;
}

function renderLinkGroup(name: string, label: string, links: LinkEntry[], ownNodeId: string): string {
  if (links.length === 0) {
    return "";
  }
  const items = links
    .map((link) => {
      const label_ = esc(refLabel(link.ref)) + ` <span class="kind">${esc(link.ref.kind)}</span>`;
      if (link.ref.node_id === ownNodeId) {
        const href = detailHash(link.ref.node_id, link.ref.local_id, link.ref.version);
        return `<li><a class="link local" href="${href}">${label_}</a></li>`;
      }
      const badge = `<span class="badge remote" title="dataset owned by another node">@${esc(link.ref.node_id)}</span>`;
      if (link.catalogue_url) {
        return `<li><a class="link remote" href="${esc(link.catalogue_url)}" target="_blank" rel="noopener">${label_}</a> ${badge}</li>`;
      }
      return `<li><span class="link unresolved">${label_}</span> ${badge}</li>`;
    })
    .join("");
  return `<div class="link-group" data-links="${name}"><h3>${esc(label)}</h3><ul>${items}</ul></div>`;
}

function renderAccess(payload: DetailPayload, request: AccessRequestView | null): string {
  const record = payload.record;
  if (record.download_policy === "automatic") {
    return `<a class="download" href="${esc(payload.download_url)}" download>Download</a>
      <p class="hash">sha-256 <code>${esc(record.content_hash)}</code></p>`;
  }
  if (request) {
    return `
      <div class="request-state status-${esc(request.status)}">
        Access request <code>${esc(request.request_id)}</code> is <strong>${esc(request.status)}</strong>.
        ${request.status === "approved" ? "<p>Use the token the data owner sent you to download.</p>" : ""}
      </div>`;
  }
  return `
    <form class="request" data-request-form>
      <p>This dataset is distributed on request. Ask the data owner for access:</p>
      <input name="contact" type="text" required placeholder="your contact (email)" />
      <textarea name="justification" placeholder="why you need this dataset"></textarea>
      <button type="submit">Submit access request</button>
    </form>`;
}

export function renderDetail(
  payload: DetailPayload,
  ownNodeId: string,
  lang: string,
  request: AccessRequestView | null,
): string {
  const record = payload.record;
  const [titleTag, title] = pickLanguage(record.title, lang);
  const [descTag, description] = pickLanguage(record.description, lang);
  const tags = Array.from(
    new Set([...Object.keys(record.title), ...Object.keys(record.description)]),
  ).sort();
  const switcher = tags
    .map(
      (tag) =>
        `<button class="chip${tag === (lang || titleTag) ? " active" : ""}" data-lang="${esc(tag)}">${esc(tag)}</button>`,
    )
    .join("");
  const categories = record.categories.map((c) => `<span class="tag">${esc(c)}</span>`).join(" ");
  return `
    <section class="detail">
      <p><a href="#/datasets">← all datasets</a></p>
      <h1 lang="${esc(titleTag)}">${esc(title)}</h1>
      <div class="langs">${switcher}</div>
      <p class="description" lang="${esc(descTag)}">${esc(description)}</p>
      <dl class="facts">
        <dt>dataset</dt><dd><code>${esc(refLabel(record.ref))}</code></dd>
        <dt>kind</dt><dd>${esc(record.ref.kind)}</dd>
        <dt>categories</dt><dd>${categories || "—"}</dd>
        <dt>license</dt><dd>${esc(record.license)}</dd>
        <dt>publisher</dt><dd>${esc(record.publisher)}</dd>
        <dt>issued</dt><dd>${esc(record.issued_at)}</dd>
        <dt>policy</dt><dd>${esc(record.download_policy)}</dd>
      </dl>
      ${renderLinkGroup("composed_of", "Composed of", payload.links.composed_of, ownNodeId)}
      ${renderLinkGroup("uses_language", "Uses language dataset", payload.links.uses_language, ownNodeId)}
      ${renderLinkGroup("derived_from", "Derived from", payload.links.derived_from, ownNodeId)}
      <div class="access">${renderAccess(payload, request)}</div>
    </section>`;
}

export function renderError(message: string): string {
  return `
    <section class="error">
      <h1>Something went wrong</h1>
      <p class="message">${esc(message)}</p>
      <button data-retry>Retry</button>
    </section>`;
}

export function renderLoading(): string {
  return '<section class="loading">loading…</section>';
}
