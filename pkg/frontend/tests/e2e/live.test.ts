/** UI conformance against a live node (the two-node fixture mesh).
 *
 * Run via `npm run e2e`; these tests are skipped unless the mesh is up
 * and STRATAMESH_E2E_BASE points at node B.
 */

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { CatalogueApi } from "../../src/api.js";
import { App } from "../../src/app.js";
import type { ListPage, NodeInfo } from "../../src/types.js";

const BASE = process.env["STRATAMESH_E2E_BASE"];
const PEER = process.env["STRATAMESH_E2E_PEER"];

async function settle(root: HTMLElement, timeoutMs = 5000): Promise<void> {
  const started = Date.now();
  while (Date.now() - started < timeoutMs) {
    await new Promise((resolve) => setTimeout(resolve, 25));
    if (!root.querySelector(".loading") && root.innerHTML !== "") {
      return;
    }
  }
  throw new Error(`view did not settle: ${root.innerHTML.slice(0, 200)}`);
}

describe.skipIf(!BASE)("live catalogue UI", () => {
  let root: HTMLElement;
  let app: App;

  beforeEach(() => {
    document.body.innerHTML = '<main id="app"></main>';
    root = document.getElementById("app") as HTMLElement;
    window.location.hash = "#/";
    app = new App(new CatalogueApi(BASE as string), root, window);
  });

  afterEach(() => {
    app.stop();
  });

  it("landing renders exactly the /api/v1/node payload", async () => {
    const info = (await (await fetch(`${BASE}/api/v1/node`)).json()) as NodeInfo;
    app.start();
    await settle(root);
    expect(root.querySelector("h1")?.textContent).toBe(info.node.name);
    for (const [kind, count] of Object.entries(info.counts)) {
      expect(root.querySelector(`[data-kind="${kind}"]`)?.textContent).toBe(String(count));
    }
  });

  it("kind filter restricted to language shows only language datasets", async () => {
    window.location.hash = "#/datasets?kind=language";
    app.start();
    await settle(root);
    const kinds = [...root.querySelectorAll("tbody .kind")].map((el) => el.textContent);
    expect(kinds.length).toBeGreaterThan(0);
    expect(new Set(kinds)).toEqual(new Set(["language"]));
    const api = (await (
      await fetch(`${BASE}/api/v1/datasets?kind=language&page=1&page_size=20`)
    ).json()) as ListPage;
    expect(kinds.length).toBe(api.items.length);
  });

  it("cross-node graph detail shows three composition links with peer badges", async () => {
    window.location.hash = "#/datasets/num/crossuni-graph/1";
    app.start();
    await settle(root);
    expect(root.querySelectorAll('[data-links="composed_of"] li').length).toBe(3);
    const badges = [...root.querySelectorAll(".badge.remote")].map((el) => el.textContent);
    expect(badges).toEqual(["@unitn", "@unitn"]);
    const remoteHrefs = [...root.querySelectorAll("a.link.remote")].map((a) =>
      a.getAttribute("href"),
    );
    for (const href of remoteHrefs) {
      expect(href).toContain(String(PEER));
      const reply = await fetch(String(href));
      expect(reply.status).toBe(200);
    }
  });

  it("request form posts and displays the pending state", async () => {
    window.location.hash = "#/datasets/num/university-onto/1";
    app.start();
    await settle(root);
    const form = root.querySelector<HTMLFormElement>("form[data-request-form]");
    expect(form).not.toBeNull();
    form!.querySelector<HTMLInputElement>('input[name="contact"]')!.value = "e2e@example.org";
    form!.querySelector<HTMLTextAreaElement>('textarea[name="justification"]')!.value = "ui e2e";
    form!.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    const started = Date.now();
    while (!window.location.hash.includes("request_id=") && Date.now() - started < 5000) {
      await new Promise((resolve) => setTimeout(resolve, 25));
    }
    expect(window.location.hash).toContain("request_id=");
    await app.route();
    await settle(root);
    expect(root.querySelector(".request-state")?.textContent).toContain("pending");
  });
});
