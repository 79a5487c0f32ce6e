/**
 * Wire protocol shared with the tutoring service: versioned events with a
 * strictly increasing per-stream sequence number and one terminal event.
 * The client performs no analysis of its own; everything it shows comes
 * out of these events.
 */

export const PROTOCOL_VERSION = 1;

export type EventType =
  | "session"
  | "static_findings"
  | "run_report"
  | "diagnosis"
  | "concept"
  | "example"
  | "question"
  | "notice"
  | "done"
  | "error";

export const TERMINAL_TYPES: ReadonlySet<EventType> = new Set(["done", "error"]);

export interface FeedbackEvent {
  v: number;
  seq: number;
  type: EventType;
  payload: Record<string, unknown>;
}

export type Level = "beginner" | "intermediate" | "advanced";

export const LEVELS: readonly Level[] = ["beginner", "intermediate", "advanced"];

export interface SubmitRequest {
  pseudonym: string;
  source: string;
  query?: string;
  mode?: "direct" | "socratic";
  level?: Level;
  stdin?: string;
}

const EVENT_TYPES: ReadonlySet<string> = new Set([
  "session",
  "static_findings",
  "run_report",
  "diagnosis",
  "concept",
  "example",
  "question",
  "notice",
  "done",
  "error",
]);

export function parseEventLine(line: string): FeedbackEvent {
  const data = JSON.parse(line) as Partial<FeedbackEvent>;
  if (
    typeof data.seq !== "number" ||
    typeof data.type !== "string" ||
    !EVENT_TYPES.has(data.type)
  ) {
    throw new Error(`malformed event: ${line}`);
  }
  return {
    v: typeof data.v === "number" ? data.v : PROTOCOL_VERSION,
    seq: data.seq,
    type: data.type as EventType,
    payload: (data.payload ?? {}) as Record<string, unknown>,
  };
}

export function parseEventStream(ndjson: string): FeedbackEvent[] {
  return ndjson
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map(parseEventLine);
}
