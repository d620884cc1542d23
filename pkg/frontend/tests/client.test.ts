import { describe, expect, it, vi } from "vitest";

import { ProbekitClient, type SocketLike } from "../src/client.js";
import { canonicalJson } from "../src/protocol.js";
import { emptyStateDoc } from "./helpers.js";

/** Scriptable stand-in for a websocket; the "server" side is the test. */
class MockSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  open(): void {
    this.onopen?.();
  }

  deliver(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }

  send(data: string): void {
    if (this.closed) throw new Error("send on closed socket");
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  /** Server-side close (connection lost). */
  drop(): void {
    this.closed = true;
    this.onclose?.();
  }
}

function connected(events = {}) {
  const sockets: MockSocket[] = [];
  const client = new ProbekitClient(
    "ws://test/ws",
    events,
    () => {
      const socket = new MockSocket();
      sockets.push(socket);
      return socket;
    },
    false, // no reconnect timers unless a test asks for them
  );
  client.connect();
  const socket = sockets[sockets.length - 1];
  socket.open();
  socket.deliver({ type: "full_state", snapshot: emptyStateDoc() });
  return { client, socket, sockets };
}

function delta(seq: number, changes: unknown[]) {
  return { type: "delta", seq, changes };
}

describe("sync protocol", () => {
  it("applies full_state then in-order deltas", () => {
    const { client, socket } = connected();
    expect(client.doc?.applied_seq).toBe(0);
    socket.deliver(delta(1, [{ entity: "node_added", node: { id: "a", pos: [0, 0, 0] } }]));
    socket.deliver(delta(2, [{ entity: "haptic", active: true }]));
    expect(client.doc?.applied_seq).toBe(2);
    expect(client.doc?.graph.nodes).toHaveLength(1);
    expect(client.doc?.haptic).toBe(true);
  });

  it("ignores stale deltas", () => {
    const { client, socket } = connected();
    socket.deliver(delta(1, [{ entity: "node_added", node: { id: "a" } }]));
    const before = canonicalJson(client.doc);
    socket.deliver(delta(1, [{ entity: "node_added", node: { id: "DUPLICATE" } }]));
    expect(canonicalJson(client.doc)).toBe(before);
  });

  it("requests a fresh snapshot on a seq gap", () => {
    const { client, socket } = connected();
    socket.deliver(delta(5, [{ entity: "haptic", active: true }]));
    expect(client.doc?.applied_seq).toBe(0); // gap not applied
    expect(socket.sent.map((s) => JSON.parse(s).type)).toContain("sync_request");
    const fresh = emptyStateDoc();
    fresh.applied_seq = 5;
    fresh.haptic = true;
    socket.deliver({ type: "full_state", snapshot: fresh });
    expect(client.doc?.applied_seq).toBe(5);
  });

  it("resyncs after a server restart", () => {
    const { client, socket } = connected();
    socket.deliver(delta(1, [{ entity: "node_added", node: { id: "a" } }]));
    const restarted = emptyStateDoc(); // server came back empty
    socket.deliver({ type: "full_state", snapshot: restarted });
    expect(canonicalJson(client.doc)).toBe(canonicalJson(restarted));
  });

  it("surfaces server errors and resyncs on OutOfOrder", () => {
    const errors: string[] = [];
    const { socket } = connected({
      onServerError: (_s: number, code: string) => errors.push(code),
    });
    socket.deliver({ type: "error", seq: 9, code: "OutOfOrder", message: "expected 1" });
    expect(errors).toEqual(["OutOfOrder"]);
    expect(socket.sent.map((s) => JSON.parse(s).type)).toContain("sync_request");
  });
});

describe("thin-client law", () => {
  it("stops emitting commands the moment the connection is lost", () => {
    const { client, socket } = connected();
    expect(client.sendCommand("PlaceProbe", {})).toBe(true);
    const before = canonicalJson(client.doc);
    socket.drop();
    expect(client.status).toBe("disconnected");
    const sentBefore = socket.sent.length;
    // further gestures: no commands sent, no scene/state mutation
    expect(client.sendCommand("PlaceProbe", {})).toBe(false);
    expect(client.sendCommand("DeformInput", { u: 1, dt: 0.016 })).toBe(false);
    expect(socket.sent.length).toBe(sentBefore);
    expect(canonicalJson(client.doc)).toBe(before);
  });

  it("reconnects and matches the server snapshot exactly", () => {
    vi.useFakeTimers();
    try {
      const sockets: MockSocket[] = [];
      const client = new ProbekitClient(
        "ws://test/ws",
        {},
        () => {
          const socket = new MockSocket();
          sockets.push(socket);
          return socket;
        },
        true,
      );
      client.connect();
      sockets[0].open();
      sockets[0].deliver({ type: "full_state", snapshot: emptyStateDoc() });
      sockets[0].drop();
      expect(client.status).toBe("disconnected");
      vi.advanceTimersByTime(600); // reconnect timer
      expect(sockets).toHaveLength(2);
      sockets[1].open();
      const serverDoc = emptyStateDoc();
      serverDoc.applied_seq = 7;
      serverDoc.graph.nodes = [{ id: "fresh", pos: [1, 1, 1] }];
      sockets[1].deliver({ type: "full_state", snapshot: serverDoc });
      expect(client.status).toBe("connected");
      expect(canonicalJson(client.doc)).toBe(canonicalJson(serverDoc));
    } finally {
      vi.useRealTimers();
    }
  });

  it("issues commands with the next seq", () => {
    const { client, socket } = connected();
    socket.deliver(delta(1, [{ entity: "haptic", active: false }]));
    client.sendCommand("PlaceProbe", {});
    const last = JSON.parse(socket.sent[socket.sent.length - 1]);
    expect(last.command.seq).toBe(2);
  });

  it("pipelines rapid command streams without repeating seqs", () => {
    const { client, socket } = connected();
    for (let i = 0; i < 5; i++) client.sendCommand("DeformInput", { u: 1, dt: 0.016 });
    const seqs = socket.sent.map((s) => JSON.parse(s)).filter((m) => m.type === "command")
      .map((m) => m.command.seq);
    expect(seqs).toEqual([1, 2, 3, 4, 5]);
    // a failed command resets pipelining to the server's truth
    socket.deliver(delta(1, [{ entity: "haptic", active: false }]));
    socket.deliver({ type: "error", seq: 2, code: "NoActiveProbes", message: "" });
    client.sendCommand("PlaceProbe", {});
    const last = JSON.parse(socket.sent[socket.sent.length - 1]);
    expect(last.command.seq).toBe(2);
  });
});
