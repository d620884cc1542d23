/**
 * End-to-end: a scripted session against the real server. Places two probes
 * over distant nodes, links a node from each content view, runs the deform
 * slider for one second, and teleports; then checks that
 *   - the client's folded document hashes identically to the live server
 *     snapshot (echo law over the real wire),
 *   - the server-side command log replays to the identical snapshot,
 *   - a stopped server freezes the client (thin-client law) and a restart
 *     resyncs it to the new server state exactly.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { WebSocket as WsWebSocket } from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ProbekitClient, type SocketLike } from "../src/client.js";
import { canonicalJson, type StateDoc } from "../src/protocol.js";
import { gestureToCommand, type Gesture } from "../src/input.js";
import { PYTHON } from "./helpers.js";

const sha256 = (text: string) => createHash("sha256").update(text, "utf-8").digest("hex");

const wsFactory = (url: string): SocketLike => new WsWebSocket(url) as unknown as SocketLike;

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

async function waitFor(check: () => boolean, what: string, timeoutMs = 15_000): Promise<void> {
  const t0 = Date.now();
  while (!check()) {
    if (Date.now() - t0 > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await sleep(25);
  }
}

const port = 21000 + Math.floor(Math.random() * 9000);
const base = `http://127.0.0.1:${port}`;
let workDir: string;
let server: ChildProcess | null = null;

function startServer(): ChildProcess {
  const child = spawn(
    PYTHON,
    ["-m", "probekit", "serve", "--port", String(port), "--graph", "graph.json",
      "--log", "session.jsonl"],
    { cwd: workDir, stdio: "ignore" },
  );
  return child;
}

async function serverUp(): Promise<void> {
  await waitFor(() => serverProbe(), "server /healthz", 20_000);
}

let lastProbeOk = false;
function serverProbe(): boolean {
  fetch(`${base}/healthz`).then((r) => { lastProbeOk = r.ok; }).catch(() => {
    lastProbeOk = false;
  });
  return lastProbeOk;
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "probekit-e2e-"));
  execFileSync(PYTHON, ["-m", "probekit", "gen", "--nodes", "30", "--links", "60",
    "--attrs", "4", "--seed", "5", "--positions", "--out", join(workDir, "graph.json")]);
  server = startServer();
  await serverUp();
});

afterAll(() => {
  server?.kill();
});

describe("scripted browser session against the real service", () => {
  it("drives the full scenario and replay reproduces the snapshot", async () => {
    const client = new ProbekitClient(`ws://127.0.0.1:${port}/ws`, {}, wsFactory, true);
    client.connect();
    await waitFor(() => client.doc !== null, "initial full_state");
    const doc0 = client.doc as StateDoc;
    expect(doc0.applied_seq).toBe(1); // the bootstrap LoadGraph
    expect(doc0.graph.nodes).toHaveLength(30);

    const applied = () => client.doc?.applied_seq ?? 0;
    const send = (gesture: Gesture) => {
      const spec = gestureToCommand(gesture);
      if (!spec) throw new Error("gesture did not map to a command");
      expect(client.sendCommand(spec.kind, spec.payload)).toBe(true);
    };
    const sendAndWait = async (gesture: Gesture) => {
      const before = applied();
      send(gesture);
      await waitFor(() => applied() === before + 1, `delta ${before + 1}`);
    };

    // place probe 1 over the first node, aiming a ray from above it
    const nodes = (client.doc as StateDoc).graph.nodes;
    const first = nodes[0].pos!;
    await sendAndWait({
      type: "aim",
      origin: [first[0], first[1], first[2] + 9],
      direction: [0, 0, -1],
      t: 4,
      radius: 3,
    });
    await sendAndWait({ type: "adjust", t: 9, radius: 3 });
    await sendAndWait({ type: "place" });
    await waitFor(() => (client.doc as StateDoc).probes.length === 1, "probe p1");

    // probe 2 over the node farthest from the first
    let far = nodes[1];
    let best = -1;
    for (const node of nodes.slice(1)) {
      const p = node.pos!;
      const d = (p[0] - first[0]) ** 2 + (p[1] - first[1]) ** 2 + (p[2] - first[2]) ** 2;
      if (d > best) {
        best = d;
        far = node;
      }
    }
    const fp = far.pos!;
    await sendAndWait({
      type: "aim", origin: [fp[0], fp[1], fp[2] + 9], direction: [0, 0, -1], t: 9, radius: 3,
    });
    await sendAndWait({ type: "place" });
    await waitFor(() => (client.doc as StateDoc).probes.length === 2, "probe p2");

    // cross-probe link between one member of each content view
    const state = client.doc as StateDoc;
    const p1 = state.probes.find((p) => p.id === "p1")!;
    const p2 = state.probes.find((p) => p.id === "p2")!;
    expect(p1.members.length).toBeGreaterThan(0);
    expect(p2.members.length).toBeGreaterThan(0);
    const linked = new Set(state.graph.links.map((l) => `${String(l.source)}|${String(l.target)}`));
    const isLinked = (a: unknown, b: unknown) =>
      linked.has(`${String(a)}|${String(b)}`) || linked.has(`${String(b)}|${String(a)}`);
    let pair: [unknown, unknown] | null = null;
    for (const a of p1.members) {
      for (const b of p2.members) {
        if (a !== b && !isLinked(a, b)) {
          pair = [a, b];
          break;
        }
      }
      if (pair) break;
    }
    expect(pair).not.toBeNull();
    const [nodeA, nodeB] = pair!;
    await sendAndWait({ type: "pickNode", node: nodeA as string, source: "p1" });
    await sendAndWait({ type: "pickNode", node: nodeB as string, source: "p2" });
    await sendAndWait({ type: "linkButton" });
    const withLink = client.doc as StateDoc;
    expect(
      withLink.graph.links.some(
        (l) =>
          (l.source === nodeA && l.target === nodeB) ||
          (l.source === nodeB && l.target === nodeA),
      ),
    ).toBe(true);

    // one second of deform slider at 60 Hz (pipelined stream)
    await sendAndWait({ type: "toggleTunnel", probe: "p1", active: true });
    const beforeDeform = applied();
    for (let i = 0; i < 60; i++) send({ type: "deform", u: 0.8, dt: 1 / 60 });
    await waitFor(() => applied() === beforeDeform + 60, "deform stream applied");

    await sendAndWait({ type: "teleport", probe: "p2", standoff: 6 });

    // echo law over the real wire: client document == server snapshot
    const clientHash = sha256(canonicalJson(client.doc));
    const serverHash = (await (await fetch(`${base}/session/hash`)).json()) as {
      hash: string;
      applied_seq: number;
    };
    expect(serverHash.applied_seq).toBe(applied());
    expect(clientHash).toBe(serverHash.hash);

    // the recorded server log replays to the identical snapshot, twice
    const frames1 = mkdtempSync(join(tmpdir(), "probekit-replay1-"));
    const frames2 = mkdtempSync(join(tmpdir(), "probekit-replay2-"));
    for (const out of [frames1, frames2]) {
      execFileSync(PYTHON, ["-m", "probekit", "replay", "--script",
        join(workDir, "session.jsonl"), "--out", out, "--every", "1000"],
        { stdio: "pipe" });
    }
    const final1 = readFileSync(join(frames1, "final.json"), "utf-8").trimEnd();
    const final2 = readFileSync(join(frames2, "final.json"), "utf-8").trimEnd();
    expect(final1).toBe(final2);
    expect(sha256(final1)).toBe(serverHash.hash);

    // thin-client law: stopping the server freezes the scene
    const frozen = canonicalJson(client.doc);
    server?.kill();
    server = null;
    await waitFor(() => client.status === "disconnected", "disconnect");
    expect(client.sendCommand("DeformInput", { u: 1, dt: 0.016 })).toBe(false);
    expect(client.sendCommand("PlaceProbe", {})).toBe(false);
    expect(canonicalJson(client.doc)).toBe(frozen);

    // restart: the client resyncs and matches the new server snapshot exactly
    lastProbeOk = false;
    server = startServer();
    await serverUp();
    await waitFor(
      () => client.status === "connected" && (client.doc as StateDoc).applied_seq === 1,
      "resync after restart",
      20_000,
    );
    const resyncHash = sha256(canonicalJson(client.doc));
    const restartedHash = (await (await fetch(`${base}/session/hash`)).json()) as {
      hash: string;
    };
    expect(resyncHash).toBe(restartedHash.hash);

    client.close();
  }, 120_000);
});
