import { TopikosClient } from "./api.js";
import { App } from "./app.js";

declare global {
  interface Window {
    TOPIKOS_BASE_URL?: string;
  }
}

const baseUrl = window.TOPIKOS_BASE_URL ?? "http://127.0.0.1:8765";
const root = document.getElementById("app");
if (root) {
  const app = new App(root, new TopikosClient(baseUrl));
  app.mount();
}
