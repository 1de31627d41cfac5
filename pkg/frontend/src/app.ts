/** Browser entry point: load a graph from the server and mount the studio. */

import { ApiClient, ApiError } from "./api.js";
import { mount } from "./render.js";
import { Studio } from "./studio.js";

const EMPTY_GRAPH = JSON.stringify({ format_version: 1, nodes: [], edges: [] });

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(window.location.search);
  const base = params.get("server") ?? "";
  const name = params.get("graph") ?? "building";
  const client = new ApiClient(base);
  let studio: Studio;
  try {
    studio = await Studio.fromServer(name, client);
  } catch (e) {
    studio = Studio.fromText(EMPTY_GRAPH, client, name);
    studio.ui.banner =
      e instanceof ApiError ? `could not load graph ${name}: ${e.message}` : (e as Error).message;
  }
  mount(root, studio);
}

void boot();
