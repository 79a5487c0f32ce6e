import { describe, expect, it } from "vitest";

import { TutorClient, type SocketLike } from "../src/client.js";
import type { FeedbackEvent } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onmessage: ((event: { data: string }) => void) | null = null;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.();
  }

  emit(event: object): void {
    this.onmessage?.({ data: JSON.stringify(event) });
  }
}

function fakeFetch(pseudonym: string) {
  return async () => ({ ok: true, json: async () => ({ pseudonym }) });
}

function makeClient() {
  let socket: FakeSocket | null = null;
  const client = new TutorClient(
    "http://service.test",
    (url) => {
      expect(url).toBe("ws://service.test/v1/submit");
      socket = new FakeSocket();
      queueMicrotask(() => socket!.onopen?.());
      return socket;
    },
    fakeFetch("S-ABCDEF") as never,
  );
  return { client, socket: () => socket! };
}

const REQUEST = { pseudonym: "S-ABCDEF", source: "print('hi')\n" };

describe("tutor client", () => {
  it("creates sessions over the fallback endpoint", async () => {
    const { client } = makeClient();
    expect(await client.createSession("tab-1")).toBe("S-ABCDEF");
  });

  it("delivers events in order and resolves on done", async () => {
    const { client, socket } = makeClient();
    const seen: FeedbackEvent[] = [];
    const outcome = client.submit(REQUEST, (event) => seen.push(event));
    await Promise.resolve(); // lets the socket open
    await Promise.resolve();

    expect(JSON.parse(socket().sent[0])).toEqual(REQUEST);
    socket().emit({ v: 1, seq: 1, type: "run_report", payload: { status: "ok" } });
    socket().emit({ v: 1, seq: 2, type: "diagnosis", payload: { text: "" } });
    socket().emit({ v: 1, seq: 3, type: "done", payload: {} });

    expect(await outcome).toBe("done");
    expect(seen.map((event) => event.seq)).toEqual([1, 2, 3]);
    expect(seen.map((event) => event.type)).toEqual(["run_report", "diagnosis", "done"]);
  });

  it("reports a mid-stream disconnect instead of hanging", async () => {
    const { client, socket } = makeClient();
    const outcome = client.submit(REQUEST, () => undefined);
    await Promise.resolve();
    await Promise.resolve();
    socket().emit({ v: 1, seq: 1, type: "diagnosis", payload: { text: "d" } });
    socket().close();
    expect(await outcome).toBe("disconnected");
  });

  it("resolves error outcome on an error event", async () => {
    const { client, socket } = makeClient();
    const outcome = client.submit(REQUEST, () => undefined);
    await Promise.resolve();
    await Promise.resolve();
    socket().emit({ v: 1, seq: 1, type: "error", payload: { message: "nope" } });
    expect(await outcome).toBe("error");
  });

  it("allows only one in-flight submission per session", async () => {
    const { client, socket } = makeClient();
    const first = client.submit(REQUEST, () => undefined);
    await Promise.resolve();
    await Promise.resolve();
    await expect(client.submit(REQUEST, () => undefined)).rejects.toThrow(
      "already in flight",
    );
    socket().emit({ v: 1, seq: 1, type: "done", payload: {} });
    await first;
  });
});
