import { App } from "./app";
import type { SocketLike } from "./connection";

const params = new URLSearchParams(window.location.search);
const serverUrl =
  params.get("server") ?? `ws://${window.location.hostname || "127.0.0.1"}:8765/ws`;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

// WebSocket satisfies SocketLike structurally; the handler signatures only
// differ in the DOM lib's `this`/event typing.
const app = new App(root, serverUrl, (url) => new WebSocket(url) as unknown as SocketLike);
app.start();
