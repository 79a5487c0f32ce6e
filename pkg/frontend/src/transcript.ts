/**
 * Pure transcript state: events in, new session state out.
 *
 * Nothing here touches the network or the DOM, and nothing is ever
 * persisted — replaying the same events always rebuilds the same
 * transcript, which is exactly what the snapshot tests do.
 */

import type { EventType, FeedbackEvent, Level, SubmitRequest } from "./protocol.js";

export interface BlockedRule {
  rule_id: string;
  line: number;
  matched: string;
  rationale: string;
}

export interface StaticFinding {
  rule_id: string;
  line: number;
  symbol: string | null;
  severity: string;
  text: string;
}

export interface TutorItem {
  type: EventType;
  text?: string;
  code?: string;
  rules?: BlockedRule[];
  findings?: StaticFinding[];
}

export interface ConsolePane {
  status: string | null;
  stdout: string;
  stderr: string;
}

export type TurnState = "streaming" | "complete" | "failed" | "disconnected";

export interface Turn {
  key: string; // idempotent resubmit key
  source: string;
  query?: string;
  level: Level;
  mode: string | null;
  items: TutorItem[]; // tutor content, ordered by event seq
  consolePane: ConsolePane;
  diagnosedLine: number | null;
  diagnosedTag: string | null;
  lastSeq: number;
  state: TurnState;
  errorMessage?: string;
}

export interface UiSession {
  pseudonym: string | null;
  editorBuffer: string;
  level: Level;
  connection: "idle" | "open" | "closed";
  turns: Turn[];
}

export function newSession(level: Level = "beginner"): UiSession {
  return {
    pseudonym: null,
    editorBuffer: "",
    level,
    connection: "idle",
    turns: [],
  };
}

export function setEditorBuffer(session: UiSession, text: string): UiSession {
  return { ...session, editorBuffer: text };
}

export function setConnection(
  session: UiSession,
  connection: UiSession["connection"],
): UiSession {
  return { ...session, connection };
}

export function turnByKey(session: UiSession, key: string): Turn | undefined {
  return session.turns.find((turn) => turn.key === key);
}

/**
 * Open a new turn for a submission. Re-using a key (a retry after a
 * disconnect, a double-clicked button) resets that turn for replay
 * instead of appending a duplicate.
 */
export function beginTurn(
  session: UiSession,
  key: string,
  request: Omit<SubmitRequest, "pseudonym">,
): UiSession {
  const fresh: Turn = {
    key,
    source: request.source,
    query: request.query,
    level: request.level ?? session.level,
    mode: request.mode ?? null,
    items: [],
    consolePane: { status: null, stdout: "", stderr: "" },
    diagnosedLine: null,
    diagnosedTag: null,
    lastSeq: 0,
    state: "streaming",
  };
  const existing = turnByKey(session, key);
  const turns = existing
    ? session.turns.map((turn) => (turn.key === key ? fresh : turn))
    : [...session.turns, fresh];
  // the editor keeps the student's buffer across submissions
  return { ...session, editorBuffer: request.source, turns };
}

function withTurn(
  session: UiSession,
  key: string,
  update: (turn: Turn) => Turn,
): UiSession {
  return {
    ...session,
    turns: session.turns.map((turn) => (turn.key === key ? update(turn) : turn)),
  };
}

export function applyEvent(
  session: UiSession,
  key: string,
  event: FeedbackEvent,
): UiSession {
  const turn = turnByKey(session, key);
  if (!turn) return session;
  // duplicates and stale replays are dropped: seq must advance
  if (event.seq <= turn.lastSeq || turn.state === "complete" || turn.state === "failed") {
    return session;
  }

  let next = session;
  if (event.type === "session") {
    next = { ...next, pseudonym: String(event.payload.pseudonym ?? "") };
  }

  return withTurn(next, key, (current) => {
    const updated: Turn = { ...current, lastSeq: event.seq, items: [...current.items] };
    const payload = event.payload;
    switch (event.type) {
      case "session":
        break;
      case "static_findings":
        updated.items.push({
          type: event.type,
          findings: (payload.findings as StaticFinding[]) ?? [],
        });
        break;
      case "run_report":
        updated.consolePane = {
          status: (payload.status as string) ?? null,
          stdout: (payload.stdout as string) ?? "",
          stderr: (payload.stderr as string) ?? "",
        };
        break;
      case "diagnosis": {
        const line = payload.line;
        updated.diagnosedLine = typeof line === "number" ? line : null;
        updated.diagnosedTag = (payload.tag as string) ?? null;
        updated.mode = (payload.mode as string) ?? updated.mode;
        const text = (payload.text as string) ?? "";
        if (text) updated.items.push({ type: event.type, text });
        break;
      }
      case "concept":
      case "question":
        updated.items.push({ type: event.type, text: (payload.text as string) ?? "" });
        break;
      case "example":
        updated.items.push({ type: event.type, code: (payload.code as string) ?? "" });
        break;
      case "notice":
        updated.items.push({
          type: event.type,
          text: (payload.text as string) ?? "",
          rules: (payload.rules as BlockedRule[]) ?? undefined,
        });
        break;
      case "done":
        updated.state = "complete";
        break;
      case "error":
        updated.state = "failed";
        updated.errorMessage = (payload.message as string) ?? "unknown error";
        break;
    }
    return updated;
  });
}

/** A dropped connection leaves the turn visibly incomplete and retryable. */
export function markDisconnected(session: UiSession, key: string): UiSession {
  const base = setConnection(session, "closed");
  const turn = turnByKey(base, key);
  if (!turn || turn.state !== "streaming") return base;
  return withTurn(base, key, (current) => ({ ...current, state: "disconnected" }));
}

export function canRetry(turn: Turn): boolean {
  return turn.state === "disconnected";
}

export function replayStream(
  session: UiSession,
  key: string,
  request: Omit<SubmitRequest, "pseudonym">,
  events: FeedbackEvent[],
): UiSession {
  let state = beginTurn(session, key, request);
  for (const event of events) {
    state = applyEvent(state, key, event);
  }
  return state;
}
