/**
 * Scene construction: a pure function of (snapshot document, render data).
 *
 * Nothing here simulates — node positions, probe geometry, cue geometry,
 * highlights, and content link sets all come from the server. Content views
 * are groups parented to the camera with the server-provided anchor, offset,
 * rotation, and scale, so they follow the viewpoint exactly as specified.
 */

import * as THREE from "three";

import type {
  CueDoc,
  NodeId,
  ProbeDoc,
  RenderData,
  StateDoc,
} from "./protocol.js";

export const NODE_RADIUS = 0.35;
const CONTENT_NODE_RADIUS = 0.05;
const BASE_NODE_COLOR = new THREE.Color(0.62, 0.62, 0.66);

const vec = (a: number[]) => new THREE.Vector3(a[0], a[1], a[2]);
// server quaternions are [w, x, y, z]; three wants (x, y, z, w)
const quat = (a: number[]) => new THREE.Quaternion(a[1], a[2], a[3], a[0]);
const rgb = (a: number[]) => new THREE.Color(a[0], a[1], a[2]);

export interface PickTarget {
  node: NodeId;
  source: string; // "global" or a probe id
}

export class SceneView {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly pickables: THREE.Object3D[] = [];

  private graphGroup = new THREE.Group();
  private probeGroup = new THREE.Group();
  private cueGroup = new THREE.Group();
  private contentGroup = new THREE.Group();
  private pendingGroup = new THREE.Group();

  constructor(aspect = 16 / 9) {
    this.camera = new THREE.PerspectiveCamera(60, aspect, 0.01, 5000);
    this.scene.add(this.camera); // content views are camera children
    this.scene.add(this.graphGroup, this.probeGroup, this.cueGroup, this.pendingGroup);
    this.camera.add(this.contentGroup);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.8));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(20, 30, 10);
    this.scene.add(sun);
    this.scene.background = new THREE.Color(0x0d1018);
  }

  /** Rebuild every server-derived object from the latest state. */
  update(doc: StateDoc, render: RenderData): void {
    this.syncCamera(doc);
    this.rebuildGraph(doc, render);
    this.rebuildProbes(doc);
    this.rebuildPending(doc);
    this.rebuildCues(render);
    this.rebuildContents(doc, render);
  }

  /** Structural fingerprint used by tests and the status readout. */
  counts(): { nodes: number; links: number; probes: number; cues: number; contents: number } {
    return {
      nodes: this.graphGroup.children.filter((c) => c.userData.kind === "node").length,
      links: this.graphGroup.children.filter((c) => c.userData.kind === "links").length,
      probes: this.probeGroup.children.length,
      cues: this.cueGroup.children.filter((c) => c.visible).length,
      contents: this.contentGroup.children.length,
    };
  }

  private syncCamera(doc: StateDoc): void {
    this.camera.position.copy(vec(doc.viewpoint.position));
    this.camera.quaternion.copy(quat(doc.viewpoint.orientation));
  }

  private clear(group: THREE.Group, alsoPick = false): void {
    for (const child of [...group.children]) {
      group.remove(child);
      if (alsoPick) {
        const at = this.pickables.indexOf(child);
        if (at >= 0) this.pickables.splice(at, 1);
      }
    }
  }

  private rebuildGraph(doc: StateDoc, render: RenderData): void {
    this.clear(this.graphGroup, true);
    const nodeColor = new Map<string, THREE.Color>();
    const nodeFactor = new Map<string, number>();
    for (const h of render.highlights.nodes) {
      nodeColor.set(String(h.id), rgb(h.color));
      nodeFactor.set(String(h.id), h.factor);
    }
    const positions = new Map<string, THREE.Vector3>();
    const sphere = new THREE.SphereGeometry(NODE_RADIUS, 12, 8);
    for (const node of doc.graph.nodes) {
      const pos = vec(node.pos ?? [0, 0, 0]);
      positions.set(String(node.id), pos);
      const color = nodeColor.get(String(node.id)) ?? BASE_NODE_COLOR;
      const mesh = new THREE.Mesh(
        sphere,
        new THREE.MeshLambertMaterial({ color }),
      );
      mesh.position.copy(pos);
      const factor = nodeFactor.get(String(node.id)) ?? 1.0;
      mesh.scale.setScalar(factor);
      mesh.userData = { kind: "node", node: node.id, source: "global" } satisfies
        PickTarget & { kind: string };
      this.graphGroup.add(mesh);
      this.pickables.push(mesh);
    }
    const linkColor = new Map<string, THREE.Color>();
    for (const h of render.highlights.links) {
      linkColor.set(`${String(h.source)}->${String(h.target)}`, rgb(h.color));
    }
    const plain: number[] = [];
    const highlighted: { points: number[]; color: THREE.Color }[] = [];
    for (const link of doc.graph.links) {
      const a = positions.get(String(link.source));
      const b = positions.get(String(link.target));
      if (!a || !b) continue;
      const key = `${String(link.source)}->${String(link.target)}`;
      const color = linkColor.get(key);
      if (color) highlighted.push({ points: [a.x, a.y, a.z, b.x, b.y, b.z], color });
      else plain.push(a.x, a.y, a.z, b.x, b.y, b.z);
    }
    if (plain.length) {
      const geo = new THREE.BufferGeometry();
      geo.setAttribute("position", new THREE.Float32BufferAttribute(plain, 3));
      const lines = new THREE.LineSegments(
        geo,
        new THREE.LineBasicMaterial({ color: 0x8a8f99, transparent: true, opacity: 0.45 }),
      );
      lines.userData = { kind: "links" };
      this.graphGroup.add(lines);
    }
    for (const { points, color } of highlighted) {
      const geo = new THREE.BufferGeometry();
      geo.setAttribute("position", new THREE.Float32BufferAttribute(points, 3));
      const lines = new THREE.LineSegments(
        geo,
        new THREE.LineBasicMaterial({ color, linewidth: 2 }),
      );
      lines.userData = { kind: "links", highlighted: true };
      this.graphGroup.add(lines);
    }
  }

  private probeSphere(probe: ProbeDoc, opacity: number): THREE.Mesh {
    const mesh = new THREE.Mesh(
      new THREE.SphereGeometry(probe.ball.radius, 24, 16),
      new THREE.MeshLambertMaterial({
        color: rgb(probe.color),
        transparent: true,
        opacity,
        depthWrite: false,
        side: THREE.DoubleSide,
      }),
    );
    mesh.position.copy(vec(probe.ball.center));
    mesh.userData = { kind: "probe", probe: probe.id };
    return mesh;
  }

  private rebuildProbes(doc: StateDoc): void {
    this.clear(this.probeGroup);
    for (const probe of doc.probes) {
      this.probeGroup.add(this.probeSphere(probe, probe.active ? 0.3 : 0.16));
    }
  }

  private rebuildPending(doc: StateDoc): void {
    this.clear(this.pendingGroup);
    if (doc.pending_probe) {
      const mesh = this.probeSphere(doc.pending_probe, 0.22);
      // haptic flag renders as a brighter pulse on the in-hand probe
      if (doc.haptic) (mesh.material as THREE.MeshLambertMaterial).opacity = 0.5;
      this.pendingGroup.add(mesh);
    }
  }

  private rebuildCues(render: RenderData): void {
    this.clear(this.cueGroup);
    for (const cue of render.cues) {
      this.cueGroup.add(cue.type === "cone" ? this.buildCone(cue) : this.buildTunnel(cue));
    }
  }

  private buildCone(cue: Extract<CueDoc, { type: "cone" }>): THREE.Object3D {
    const cone = new THREE.Mesh(
      new THREE.ConeGeometry(0.05, 0.14, 12),
      new THREE.MeshBasicMaterial({
        color: rgb(cue.color),
        transparent: true,
        opacity: cue.opacity,
      }),
    );
    cone.position.copy(vec(cue.apex));
    // ConeGeometry points along +Y; aim it down the server-computed axis
    cone.quaternion.setFromUnitVectors(new THREE.Vector3(0, 1, 0), vec(cue.axis).normalize());
    cone.visible = cue.visible;
    cone.userData = { kind: "cone", probe: cue.probe };
    return cone;
  }

  private buildTunnel(cue: Extract<CueDoc, { type: "tunnel" }>): THREE.Object3D {
    const start = vec(cue.start);
    const end = vec(cue.end);
    const span = new THREE.Vector3().subVectors(end, start);
    const length = Math.max(span.length(), 1e-6);
    const tunnel = new THREE.Mesh(
      // radiusTop at +Y end = probe-side radius, radiusBottom = content side
      new THREE.CylinderGeometry(cue.end_radius, cue.start_radius, length, 20, 1, true),
      new THREE.MeshBasicMaterial({
        color: rgb(cue.color),
        transparent: true,
        opacity: 0.25,
        side: THREE.DoubleSide,
        depthWrite: false,
      }),
    );
    tunnel.position.copy(start.clone().add(end).multiplyScalar(0.5));
    tunnel.quaternion.setFromUnitVectors(
      new THREE.Vector3(0, 1, 0),
      span.normalize(),
    );
    tunnel.visible = cue.visible;
    tunnel.userData = { kind: "tunnel", probe: cue.probe };
    return tunnel;
  }

  private rebuildContents(doc: StateDoc, render: RenderData): void {
    this.clear(this.contentGroup, true);
    const linksByProbe = new Map(render.contents.map((c) => [c.probe, c.links]));
    for (const probe of doc.probes) {
      if (!probe.content) continue;
      const content = probe.content;
      const group = new THREE.Group();
      group.position.copy(vec(content.anchor).add(vec(content.user_offset)));
      group.quaternion.copy(quat(content.rotation));
      group.scale.setScalar(content.scale);
      group.userData = { kind: "content", probe: probe.id };

      this.contentGroup.add(group);
      const ballCenter = vec(probe.ball.center);
      const captured = new Map<string, THREE.Vector3>();
      const sphere = new THREE.SphereGeometry(CONTENT_NODE_RADIUS / content.scale, 10, 6);
      for (const [id, pos] of content.captured) {
        // the similarity transform's rotation + scale live on the group
        const local = vec(pos).sub(ballCenter);
        captured.set(String(id), local);
        const mesh = new THREE.Mesh(
          sphere,
          new THREE.MeshLambertMaterial({ color: rgb(probe.color) }),
        );
        mesh.position.copy(local);
        mesh.userData = { kind: "contentNode", node: id, source: probe.id } satisfies
          PickTarget & { kind: string };
        group.add(mesh);
        this.pickables.push(mesh);
      }
      const pts: number[] = [];
      for (const link of linksByProbe.get(probe.id) ?? []) {
        const a = captured.get(String(link.source));
        const b = captured.get(String(link.target));
        if (a && b) pts.push(a.x, a.y, a.z, b.x, b.y, b.z);
      }
      if (pts.length) {
        const geo = new THREE.BufferGeometry();
        geo.setAttribute("position", new THREE.Float32BufferAttribute(pts, 3));
        group.add(new THREE.LineSegments(
          geo,
          new THREE.LineBasicMaterial({ color: rgb(probe.color) }),
        ));
      }
    }
  }
}

/** Resolve a raycast hit to a selectable node reference, if any. */
export function pickTargetFromHit(object: THREE.Object3D): PickTarget | null {
  const data = object.userData;
  if (data && (data.kind === "node" || data.kind === "contentNode")) {
    return { node: data.node as NodeId, source: data.source as string };
  }
  return null;
}
