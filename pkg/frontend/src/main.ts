import { CatalogueApi, resolveApiBase } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const api = new CatalogueApi(resolveApiBase(window));
new App(api, root, window).start();
