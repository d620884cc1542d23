import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import type { RenderData, StateDoc } from "../src/protocol.js";
import { emptyRenderData } from "../src/protocol.js";

export const PYTHON = process.env.PROBEKIT_PYTHON ?? "python3";

/** Replay the bundled demo via the CLI and return canonical frame texts. */
export function demoFrames(every = 30): { name: string; text: string }[] {
  const dir = mkdtempSync(join(tmpdir(), "probekit-frames-"));
  execFileSync(PYTHON, ["-m", "probekit", "replay", "--script", "demo",
    "--out", dir, "--every", String(every)], { stdio: "pipe" });
  return readdirSync(dir)
    .filter((f) => f.endsWith(".json"))
    .sort()
    .map((name) => ({ name, text: readFileSync(join(dir, name), "utf-8").trimEnd() }));
}

export function emptyStateDoc(): StateDoc {
  return {
    version: 1,
    applied_seq: 0,
    graph: { directed: false, nodes: [], links: [] },
    viewpoint: { position: [0, 0, 0], orientation: [1, 0, 0, 0], mode: "egocentric" },
    probes: [],
    pending_probe: null,
    selection: [],
    haptic: false,
    cue_params: {
      cone_angle_threshold: 0.5235987755982988,
      cone_rotation: 0.3490658503988659,
      cone_distance: 0.5,
      opacity_reference: 10.0,
      opacity_floor: 0.1,
    },
    deform: { kappa: 1.0 },
    counters: { probe_seq: 0, palette: 0 },
  };
}

export function sampleState(): { doc: StateDoc; render: RenderData } {
  const doc = emptyStateDoc();
  doc.applied_seq = 4;
  doc.graph.nodes = [
    { id: "a", pos: [0, 0, 0] },
    { id: "b", pos: [4, 0, 0], attrs: { minutesPlayed: 90 } },
    { id: "c", pos: [0, 4, 0] },
  ];
  doc.graph.links = [
    { source: "a", target: "b" },
    { source: "b", target: "c" },
  ];
  doc.probes = [
    {
      id: "p1",
      ball: { center: [4, 0, 0], radius: 2 },
      color: [0.894, 0.102, 0.11],
      active: true,
      placed: true,
      members: ["b"],
      content: {
        anchor: [0, 0, -0.6],
        user_offset: [0, 0, 0],
        rotation: [1, 0, 0, 0],
        scale: 0.15,
        captured: [["b", [4, 0, 0]]],
      },
    },
  ];
  const render: RenderData = {
    cues: [
      { type: "cone", probe: "p1", visible: true, apex: [0.2, 0, -0.4],
        axis: [1, 0, 0], opacity: 0.7, color: [0.894, 0.102, 0.11] },
      { type: "tunnel", probe: "p1", visible: true, start: [0.15, 0, -0.6],
        end: [2, 0, 0], start_radius: 0.3, end_radius: 2, color: [0.894, 0.102, 0.11] },
    ],
    highlights: {
      nodes: [{ id: "b", color: [0.894, 0.102, 0.11], factor: 1.5 }],
      links: [],
    },
    contents: [{ probe: "p1", links: [] }],
  };
  return { doc, render };
}

export { emptyRenderData };
