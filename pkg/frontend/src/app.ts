/** Browser wiring: one session per tab, a live event stream, and an input
 * box that flips between query, clarification-reply, and feedback modes. */

import { ApiClient, ApiError } from "./api.js";
import { renderArtifact } from "./render.js";
import { EventStream } from "./stream.js";
import type { QueryRequest } from "./types.js";
import { ConversationView } from "./view.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const KNOWN_SESSIONS_KEY = "orca-ui.sessions";
const BASE_URL_KEY = "orca-ui.baseUrl";

let client: ApiClient;
let view = new ConversationView();
let stream: EventStream | null = null;
let sessionId: string | null = null;

function knownSessions(): string[] {
  try {
    return JSON.parse(localStorage.getItem(KNOWN_SESSIONS_KEY) ?? "[]");
  } catch {
    return [];
  }
}

function rememberSession(id: string): void {
  const all = knownSessions().filter((s) => s !== id);
  all.unshift(id);
  localStorage.setItem(KNOWN_SESSIONS_KEY, JSON.stringify(all.slice(0, 20)));
}

async function refreshHealth(): Promise<void> {
  const select = $<HTMLSelectElement>("database");
  try {
    const health = await client.health();
    select.innerHTML = health.databases
      .map((db) => `<option value="${db}">${db}</option>`)
      .join("");
    $("status").textContent = `service ok · ${health.databases.length} databases`;
  } catch {
    $("status").textContent = "service unreachable";
  }
  const picker = $<HTMLDataListElement>("known-sessions");
  picker.innerHTML = knownSessions()
    .map((s) => `<option value="${s}"></option>`)
    .join("");
}

function redraw(): void {
  const log = $("messages");
  log.innerHTML = view.messages
    .map((m) => {
      const meta =
        m.role === "system" && m.sequence
          ? `<div class="meta">#${m.sequence} · ${m.title ?? m.stage}</div>`
          : "";
      return `<div class="msg ${m.role}">${meta}${m.html}</div>`;
    })
    .join("");
  log.scrollTop = log.scrollHeight;

  const pending = $("pending");
  if (view.awaitingReply) {
    pending.textContent = view.pendingQuestion ?? "";
    pending.classList.remove("hidden");
    $<HTMLInputElement>("text").placeholder = "answer the clarification…";
  } else {
    pending.classList.add("hidden");
    $<HTMLInputElement>("text").placeholder =
      "ask about the data, or refine the last report…";
  }

  const panel = $("artifacts");
  const items = [...view.artifacts.values()];
  panel.innerHTML = items.length
    ? items
        .map(
          (a) =>
            `<details ${a === items[items.length - 1] ? "open" : ""}>` +
            `<summary>${a.artifactId} · ${a.kind}</summary>` +
            renderArtifact(a.kind, a.body) +
            `</details>`,
        )
        .join("")
    : `<div class="note dim">artifacts appear here</div>`;
}

function follow(id: string): void {
  stream?.stop();
  sessionId = id;
  view = new ConversationView();
  rememberSession(id);
  $<HTMLInputElement>("session").value = id;
  stream = new EventStream(
    client.baseUrl,
    id,
    (event) => {
      view.applyEvent(event);
      redraw();
    },
    { pollDelayMs: 700 },
  );
  void stream.run();
  redraw();
}

async function newSession(): Promise<void> {
  const database = $<HTMLSelectElement>("database").value;
  try {
    const ref = await client.createSession(database);
    follow(ref.session_id);
  } catch (err) {
    reportError(err);
  }
}

function queryRequest(text: string): QueryRequest {
  const request: QueryRequest = { text };
  const graph = $<HTMLTextAreaElement>("graph").value.trim();
  const treatment = $<HTMLInputElement>("treatment").value.trim();
  const outcome = $<HTMLInputElement>("outcome").value.trim();
  const bindingsText = $<HTMLTextAreaElement>("bindings").value.trim();
  if (graph) request.graph_text = graph;
  if (treatment) request.treatment = treatment;
  if (outcome) request.outcome = outcome;
  if (bindingsText) {
    const bindings: Record<string, [string, string]> = {};
    for (const line of bindingsText.split("\n")) {
      const m = /^\s*(\w+)\s*=\s*(\w+)\.(\w+)\s*$/.exec(line);
      if (m) bindings[m[1]] = [m[2], m[3]];
    }
    if (Object.keys(bindings).length) request.bindings = bindings;
  }
  return request;
}

function reportError(err: unknown): void {
  const text =
    err instanceof ApiError
      ? `${err.kind}: ${err.message.split(": ").slice(1).join(": ")}`
      : String(err);
  view.addNotice(`<div class="callout error">${text}</div>`);
  redraw();
}

async function submit(): Promise<void> {
  if (!sessionId) {
    view.addNotice(`<div class="callout">create or open a session first</div>`);
    redraw();
    return;
  }
  const input = $<HTMLInputElement>("text");
  const text = input.value.trim();
  if (!text) return;
  input.value = "";
  view.addUserTurn(text);
  redraw();
  const asFeedback =
    view.awaitingReply || $<HTMLInputElement>("as-feedback").checked;
  try {
    if (asFeedback) {
      await client.submitFeedback(sessionId, text);
    } else {
      await client.submitQuery(sessionId, queryRequest(text));
    }
    // the event stream renders the server's side of the exchange
  } catch (err) {
    reportError(err);
  }
}

function boot(): void {
  const baseInput = $<HTMLInputElement>("base-url");
  baseInput.value =
    localStorage.getItem(BASE_URL_KEY) ?? "http://127.0.0.1:8000";
  client = new ApiClient(baseInput.value);
  baseInput.addEventListener("change", () => {
    localStorage.setItem(BASE_URL_KEY, baseInput.value);
    client = new ApiClient(baseInput.value);
    void refreshHealth();
  });
  $("new-session").addEventListener("click", () => void newSession());
  $("open-session").addEventListener("click", () => {
    const id = $<HTMLInputElement>("session").value.trim();
    if (id) follow(id);
  });
  $("send").addEventListener("click", () => void submit());
  $<HTMLInputElement>("text").addEventListener("keydown", (e) => {
    if (e.key === "Enter") void submit();
  });
  void refreshHealth();
  redraw();
}

document.addEventListener("DOMContentLoaded", boot);
