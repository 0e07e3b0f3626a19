import { OperatorApp } from "./app.js";

async function main() {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const base = `${location.protocol}//${location.host}`;
  const app = new OperatorApp(root, base);
  try {
    await app.init();
  } catch (err) {
    app.showBanner(`service unreachable: ${err}`);
  }
}

window.addEventListener("load", () => void main());
