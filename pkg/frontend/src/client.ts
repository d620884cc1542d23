/**
 * Connection and state synchronization.
 *
 * The client holds the latest applied snapshot document plus the derived
 * render payload, both fed exclusively by server messages: full_state
 * replaces everything, deltas fold in via applyChanges. Stale deltas
 * (seq <= applied) are ignored; a gap requests a fresh full_state; a lost
 * connection flips status and schedules reconnects.
 */

import {
  applyChanges,
  emptyRenderData,
  type Change,
  type RenderData,
  type ServerMsg,
  type StateDoc,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ClientStatus = "connecting" | "connected" | "disconnected";

export interface ClientEvents {
  onState?: (doc: StateDoc, render: RenderData) => void;
  onStatus?: (status: ClientStatus) => void;
  onServerError?: (seq: number, code: string, message: string) => void;
}

export class ProbekitClient {
  doc: StateDoc | null = null;
  render: RenderData = emptyRenderData();
  status: ClientStatus = "disconnected";

  private socket: SocketLike | null = null;
  private reconnectDelayMs = 500;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private lastSentSeq = 0; // pipelining: command streams outrun delta round trips

  constructor(
    private url: string,
    private events: ClientEvents = {},
    private socketFactory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private reconnect = true,
  ) {}

  connect(): void {
    this.closed = false;
    this.setStatus("connecting");
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.reconnectDelayMs = 500;
      this.setStatus("connected");
    };
    socket.onmessage = (event) => this.handleMessage(JSON.parse(event.data) as ServerMsg);
    socket.onclose = () => this.handleClose();
    socket.onerror = () => {};
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
    this.socket = null;
    this.setStatus("disconnected");
  }

  /** Next command seq: one past the newest applied or in-flight command. */
  nextSeq(): number {
    return Math.max(this.doc?.applied_seq ?? 0, this.lastSentSeq) + 1;
  }

  /**
   * Send one command. Returns false (and sends nothing) when disconnected:
   * gestures while the server is down must not mutate anything.
   */
  sendCommand(kind: string, payload: Record<string, unknown>): boolean {
    if (this.status !== "connected" || this.socket === null) return false;
    const seq = this.nextSeq();
    this.socket.send(JSON.stringify({ type: "command", command: { seq, kind, payload } }));
    this.lastSentSeq = seq;
    return true;
  }

  requestSync(): void {
    if (this.status === "connected" && this.socket !== null) {
      this.socket.send(JSON.stringify({ type: "sync_request" }));
    }
  }

  private handleMessage(msg: ServerMsg): void {
    if (msg.type === "full_state") {
      this.doc = msg.snapshot;
      this.render = msg.render ?? emptyRenderData();
      this.lastSentSeq = this.doc.applied_seq;
      this.emitState();
      return;
    }
    if (msg.type === "delta") {
      if (this.doc === null) return; // full_state not here yet
      if (msg.seq <= this.doc.applied_seq) return; // stale, already applied
      if (msg.seq > this.doc.applied_seq + 1) {
        this.requestSync(); // gap: ask for a fresh snapshot
        return;
      }
      this.doc = applyChanges(this.doc, msg.seq, msg.changes as Change[], this.render);
      this.emitState();
      return;
    }
    if (msg.type === "error") {
      this.lastSentSeq = this.doc?.applied_seq ?? 0; // a command failed: stop pipelining past it
      this.events.onServerError?.(msg.seq, msg.code, msg.message);
      if (msg.code === "OutOfOrder") this.requestSync();
    }
  }

  private handleClose(): void {
    this.socket = null;
    this.setStatus("disconnected");
    if (this.closed || !this.reconnect) return;
    this.reconnectTimer = setTimeout(() => this.connect(), this.reconnectDelayMs);
    this.reconnectDelayMs = Math.min(this.reconnectDelayMs * 2, 10_000);
  }

  private emitState(): void {
    if (this.doc !== null) this.events.onState?.(this.doc, this.render);
  }

  private setStatus(status: ClientStatus): void {
    if (this.status !== status) {
      this.status = status;
      this.events.onStatus?.(status);
    }
  }
}
