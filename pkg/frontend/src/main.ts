/**
 * Browser entry point. The service base URL comes from the `service` query
 * parameter and defaults to the page origin:
 *
 *     index.html?service=http://127.0.0.1:8000
 */

import { ExplorerApp } from "./app.js";

const root = document.getElementById("explorer-root");
if (!root) {
  throw new Error("missing #explorer-root element");
}

const params = new URLSearchParams(window.location.search);
new ExplorerApp(root, { baseUrl: params.get("service") ?? "" });
