import { describe, expect, it } from "vitest";

import { gestureToCommand } from "../src/input.js";

describe("gesture mapping", () => {
  it("aim begins a probe along the mouse ray", () => {
    const spec = gestureToCommand({
      type: "aim", origin: [0, 0, 5], direction: [0, 0, -1], t: 10, radius: 2,
    });
    expect(spec).toEqual({
      kind: "BeginProbe",
      payload: { ray: { origin: [0, 0, 5], direction: [0, 0, -1] }, t: 10, radius: 2 },
    });
  });

  it("scroll adjusts the in-hand probe", () => {
    expect(gestureToCommand({ type: "adjust", t: 12, radius: 3 })).toEqual({
      kind: "AdjustProbe", payload: { t: 12, radius: 3 },
    });
  });

  it("click places", () => {
    expect(gestureToCommand({ type: "place" })).toEqual({ kind: "PlaceProbe", payload: {} });
  });

  it("content clicks select with the probe as source", () => {
    expect(gestureToCommand({ type: "pickNode", node: "n007", source: "p2" })).toEqual({
      kind: "SelectNode", payload: { node: "n007", source: "p2" },
    });
  });

  it("unpickable gestures emit nothing", () => {
    expect(gestureToCommand({ type: "pickMiss" })).toBeNull();
  });

  it("link button creates a link from the pending selection", () => {
    expect(gestureToCommand({ type: "linkButton" })).toEqual({
      kind: "CreateLink", payload: {},
    });
  });

  it("deform slider streams clamped input", () => {
    expect(gestureToCommand({ type: "deform", u: 1, dt: 0.016 })).toEqual({
      kind: "DeformInput", payload: { u: 1, dt: 0.016 },
    });
    expect(gestureToCommand({ type: "deform", u: 4, dt: 0.016 })?.payload.u).toBe(1);
    expect(gestureToCommand({ type: "deform", u: -4, dt: 0.016 })?.payload.u).toBe(-1);
  });

  it("tunnel toggle drives probe activation", () => {
    expect(gestureToCommand({ type: "toggleTunnel", probe: "p1", active: true })).toEqual({
      kind: "SetProbeActive", payload: { probe: "p1", active: true },
    });
  });

  it("teleport, view mode, auto place, content handling", () => {
    expect(gestureToCommand({ type: "teleport", probe: "p1", standoff: 4 })).toEqual({
      kind: "TeleportToProbe", payload: { probe: "p1", standoff: 4 },
    });
    expect(gestureToCommand({ type: "viewMode", mode: "exocentric" })).toEqual({
      kind: "SetViewMode", payload: { mode: "exocentric" },
    });
    expect(
      gestureToCommand({ type: "autoPlace", attribute: "minutesPlayed", objective: "max", radius: 2 }),
    ).toEqual({
      kind: "PlaceProbe",
      payload: { auto: { attribute: "minutesPlayed", objective: "max", radius: 2 } },
    });
    expect(gestureToCommand({ type: "moveContent", probe: "p1", offset: [0.1, 0, 0] })).toEqual({
      kind: "MoveContentView", payload: { probe: "p1", offset: [0.1, 0, 0] },
    });
    expect(
      gestureToCommand({ type: "rotateContent", probe: "p1", rotation: [1, 0, 0, 0] }),
    ).toEqual({
      kind: "RotateContentView", payload: { probe: "p1", rotation: [1, 0, 0, 0] },
    });
    expect(gestureToCommand({ type: "refresh", probe: "p2" })).toEqual({
      kind: "RefreshContent", payload: { probe: "p2" },
    });
  });

  it("editing gestures map to graph commands", () => {
    expect(gestureToCommand({ type: "createNode", id: "x1", position: [1, 2, 3] })).toEqual({
      kind: "CreateNode", payload: { id: "x1", position: [1, 2, 3] },
    });
    expect(gestureToCommand({ type: "removeNode", node: "a", source: "p1" })).toEqual({
      kind: "RemoveNode", payload: { node: "a", source: "p1" },
    });
    expect(gestureToCommand({ type: "removeLink", source: "a", target: "b" })).toEqual({
      kind: "RemoveLink", payload: { source: "a", target: "b" },
    });
  });
});
