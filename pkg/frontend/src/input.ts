/**
 * Desktop gestures -> session commands (the mouse/keyboard analog of the
 * pointing controller): the mouse raycast stands in for the controller ray,
 * scroll slides the in-hand probe along it, modifier+scroll scales it, a
 * click places, clicking nodes selects, and a slider streams deformation
 * input. Every recognized gesture maps to exactly one well-formed command;
 * unpickable gestures map to null.
 */

import type { NodeId } from "./protocol.js";

export type Gesture =
  | { type: "aim"; origin: number[]; direction: number[]; t: number; radius: number }
  | { type: "adjust"; t: number; radius: number }
  | { type: "place" }
  | { type: "autoPlace"; attribute: string; objective: "max" | "min"; radius: number }
  | { type: "pickNode"; node: NodeId; source: string }
  | { type: "pickMiss" }
  | { type: "linkButton" }
  | { type: "createNode"; id: string; position: number[] }
  | { type: "removeNode"; node: NodeId; source: string }
  | { type: "removeLink"; source: NodeId; target: NodeId }
  | { type: "toggleTunnel"; probe: string; active: boolean }
  | { type: "reposition"; probe: string; center: number[]; radius: number }
  | { type: "moveContent"; probe: string; offset: number[] }
  | { type: "rotateContent"; probe: string; rotation: number[] }
  | { type: "refresh"; probe: string }
  | { type: "deform"; u: number; dt: number }
  | { type: "teleport"; probe: string; standoff: number }
  | { type: "viewMode"; mode: "egocentric" | "exocentric" }
  | { type: "cameraMoved"; position: number[]; orientation: number[] };

export interface CommandSpec {
  kind: string;
  payload: Record<string, unknown>;
}

export function gestureToCommand(gesture: Gesture): CommandSpec | null {
  switch (gesture.type) {
    case "aim":
      return {
        kind: "BeginProbe",
        payload: {
          ray: { origin: gesture.origin, direction: gesture.direction },
          t: gesture.t,
          radius: gesture.radius,
        },
      };
    case "adjust":
      return { kind: "AdjustProbe", payload: { t: gesture.t, radius: gesture.radius } };
    case "place":
      return { kind: "PlaceProbe", payload: {} };
    case "autoPlace":
      return {
        kind: "PlaceProbe",
        payload: {
          auto: {
            attribute: gesture.attribute,
            objective: gesture.objective,
            radius: gesture.radius,
          },
        },
      };
    case "pickNode":
      return { kind: "SelectNode", payload: { node: gesture.node, source: gesture.source } };
    case "pickMiss":
      return null; // unpickable: no command
    case "linkButton":
      return { kind: "CreateLink", payload: {} };
    case "createNode":
      return { kind: "CreateNode", payload: { id: gesture.id, position: gesture.position } };
    case "removeNode":
      return { kind: "RemoveNode", payload: { node: gesture.node, source: gesture.source } };
    case "removeLink":
      return {
        kind: "RemoveLink",
        payload: { source: gesture.source, target: gesture.target },
      };
    case "toggleTunnel":
      return {
        kind: "SetProbeActive",
        payload: { probe: gesture.probe, active: gesture.active },
      };
    case "reposition":
      return {
        kind: "RepositionProbe",
        payload: { probe: gesture.probe, ball: { center: gesture.center, radius: gesture.radius } },
      };
    case "moveContent":
      return { kind: "MoveContentView", payload: { probe: gesture.probe, offset: gesture.offset } };
    case "rotateContent":
      return {
        kind: "RotateContentView",
        payload: { probe: gesture.probe, rotation: gesture.rotation },
      };
    case "refresh":
      return { kind: "RefreshContent", payload: { probe: gesture.probe } };
    case "deform": {
      const u = Math.max(-1, Math.min(1, gesture.u));
      return { kind: "DeformInput", payload: { u, dt: gesture.dt } };
    }
    case "teleport":
      return {
        kind: "TeleportToProbe",
        payload: { probe: gesture.probe, standoff: gesture.standoff },
      };
    case "viewMode":
      return { kind: "SetViewMode", payload: { mode: gesture.mode } };
    case "cameraMoved":
      return {
        kind: "SetViewpoint",
        payload: { position: gesture.position, orientation: gesture.orientation },
      };
  }
}
