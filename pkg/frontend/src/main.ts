/** Browser entry point. */

import { App } from "./app.js";

function boot(): void {
  const root = document.getElementById("app");
  if (root === null) return;
  const app = new App(root);
  void app.init();
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}
