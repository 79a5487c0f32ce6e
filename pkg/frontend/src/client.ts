/**
 * Service client: WebSocket stream with a POST fallback. The socket
 * factory and fetch are injectable so tests can drive the client without
 * a network.
 */

import { parseEventLine, TERMINAL_TYPES } from "./protocol.js";
import type { FeedbackEvent, SubmitRequest } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type FetchLike = (
  url: string,
  init: { method: string; headers: Record<string, string>; body: string },
) => Promise<{ ok: boolean; json(): Promise<unknown> }>;

export type SubmitOutcome = "done" | "error" | "disconnected";

export class TutorClient {
  private socket: SocketLike | null = null;
  private inFlight = false;

  constructor(
    private readonly baseUrl: string,
    private readonly socketFactory?: SocketFactory,
    private readonly fetchImpl?: FetchLike,
  ) {}

  private get fetcher(): FetchLike {
    return this.fetchImpl ?? (fetch as unknown as FetchLike);
  }

  async createSession(clientIdentifier: string): Promise<string> {
    const response = await this.fetcher(`${this.baseUrl}/v1/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ client_identifier: clientIdentifier }),
    });
    if (!response.ok) throw new Error("session creation failed");
    const data = (await response.json()) as { pseudonym: string };
    return data.pseudonym;
  }

  private socketUrl(): string {
    return this.baseUrl.replace(/^http/, "ws") + "/v1/submit";
  }

  private openSocket(): Promise<SocketLike> {
    const factory =
      this.socketFactory ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike);
    return new Promise((resolve, reject) => {
      const socket = factory(this.socketUrl());
      socket.onopen = () => resolve(socket);
      socket.onerror = () => reject(new Error("connection failed"));
    });
  }

  /**
   * Stream one submission; events arrive through onEvent in seq order.
   * Resolves with how the stream ended. At most one submission is in
   * flight per client, matching the service's per-session serialization.
   */
  async submit(
    request: SubmitRequest,
    onEvent: (event: FeedbackEvent) => void,
  ): Promise<SubmitOutcome> {
    if (this.inFlight) throw new Error("a submission is already in flight");
    this.inFlight = true;
    try {
      if (this.socket === null) {
        this.socket = await this.openSocket();
      }
      const socket = this.socket;
      return await new Promise<SubmitOutcome>((resolve) => {
        socket.onmessage = (message) => {
          const event = parseEventLine(message.data);
          onEvent(event);
          if (TERMINAL_TYPES.has(event.type)) {
            resolve(event.type === "done" ? "done" : "error");
          }
        };
        socket.onclose = () => {
          this.socket = null;
          resolve("disconnected");
        };
        socket.onerror = socket.onclose;
        socket.send(JSON.stringify(request));
      });
    } finally {
      this.inFlight = false;
    }
  }

  /** Request/response fallback for environments without WebSocket. */
  async submitOnce(request: SubmitRequest): Promise<FeedbackEvent[]> {
    const response = await this.fetcher(`${this.baseUrl}/v1/submit`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw new Error("submit failed");
    const data = (await response.json()) as FeedbackEvent[];
    return data;
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
  }
}
