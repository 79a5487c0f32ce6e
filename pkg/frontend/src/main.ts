/**
 * Browser bootstrap: wires the editor textarea, the client, the pure
 * transcript state, and the renderer together. All analysis happens
 * server-side; this file only moves events around.
 *
 * Nothing is written to persistent browser storage: the session lives in
 * memory and ends with the tab.
 */

import { TutorClient } from "./client.js";
import type { Level, SubmitRequest } from "./protocol.js";
import { LEVELS } from "./protocol.js";
import { renderApp } from "./render.js";
import { buildSimplify } from "./simplify.js";
import {
  applyEvent,
  beginTurn,
  markDisconnected,
  newSession,
  setConnection,
  setEditorBuffer,
  turnByKey,
  type UiSession,
} from "./transcript.js";

const BASE_URL = location.origin;

const client = new TutorClient(BASE_URL);
let session: UiSession = newSession();
let turnCounter = 0;
const requestByKey = new Map<string, Omit<SubmitRequest, "pseudonym">>();

const editor = document.querySelector<HTMLTextAreaElement>("#editor")!;
const query = document.querySelector<HTMLInputElement>("#query")!;
const level = document.querySelector<HTMLSelectElement>("#level")!;
const mode = document.querySelector<HTMLSelectElement>("#mode")!;
const submitButton = document.querySelector<HTMLButtonElement>("#submit")!;
const app = document.querySelector<HTMLDivElement>("#app")!;

for (const name of LEVELS) {
  const option = document.createElement("option");
  option.value = name;
  option.textContent = name;
  level.append(option);
}

function redraw(): void {
  app.innerHTML = renderApp(session);
  for (const button of app.querySelectorAll<HTMLButtonElement>("[data-retry]")) {
    button.addEventListener("click", () => resubmit(button.dataset.retry!));
  }
  for (const button of app.querySelectorAll<HTMLButtonElement>("[data-simplify]")) {
    button.addEventListener("click", () => simplify(button.dataset.simplify!));
  }
}

async function ensureSession(): Promise<string> {
  if (session.pseudonym) return session.pseudonym;
  // any stable per-tab string works; the server only ever sees its hash
  const pseudonym = await client.createSession(crypto.randomUUID());
  session = { ...session, pseudonym };
  return pseudonym;
}

async function runTurn(key: string): Promise<void> {
  const request = requestByKey.get(key)!;
  const pseudonym = await ensureSession();
  session = setConnection(beginTurn(session, key, request), "open");
  redraw();
  const outcome = await client.submit({ ...request, pseudonym }, (event) => {
    session = applyEvent(session, key, event);
    redraw(); // feedback renders stage by stage, not all at once
  });
  if (outcome === "disconnected") {
    session = markDisconnected(session, key);
  }
  redraw();
}

function submitCurrent(): void {
  const key = `turn-${++turnCounter}`;
  requestByKey.set(key, {
    source: editor.value,
    query: query.value || undefined,
    mode: (mode.value || undefined) as SubmitRequest["mode"],
    level: level.value as Level,
  });
  session = setEditorBuffer(session, editor.value);
  void runTurn(key);
}

function resubmit(key: string): void {
  if (requestByKey.has(key)) void runTurn(key); // same key: no duplicate turn
}

function simplify(key: string): void {
  const turn = turnByKey(session, key);
  if (!turn) return;
  const plan = buildSimplify(turn);
  if (!plan || requestByKey.has(plan.key)) {
    if (plan) void runTurn(plan.key); // retry path reuses the derived key
    return;
  }
  requestByKey.set(plan.key, plan.request);
  void runTurn(plan.key);
}

submitButton.addEventListener("click", submitCurrent);
redraw();
