/**
 * Browser entry point: renderer loop, orbit camera, probe placement with the
 * mouse ray, the control panel, and the websocket client. The scene is a
 * pure function of the latest server state; every interaction goes through
 * gestureToCommand -> sendCommand.
 */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";

import { ProbekitClient } from "./client.js";
import { gestureToCommand, type Gesture } from "./input.js";
import { pickTargetFromHit, SceneView } from "./scene.js";
import type { RenderData, StateDoc } from "./protocol.js";

const params = new URLSearchParams(location.search);
const defaultServer =
  (location.protocol === "https:" ? "wss" : "ws") + "://" + location.host + "/ws";
const serverUrl = params.get("server") ?? defaultServer;

const view = new SceneView(window.innerWidth / window.innerHeight);
const renderer = new THREE.WebGLRenderer({ antialias: true });
renderer.setSize(window.innerWidth, window.innerHeight);
document.body.appendChild(renderer.domElement);

const controls = new OrbitControls(view.camera, renderer.domElement);
controls.enableDamping = true;

const raycaster = new THREE.Raycaster();
const pointer = new THREE.Vector2();

// -- control panel -----------------------------------------------------------

const panel = document.createElement("div");
panel.id = "panel";
panel.innerHTML = `
  <div id="status">connecting…</div>
  <button id="probeMode">probe mode: off</button>
  <div class="hint">click to aim, wheel = distance, shift+wheel = radius, click again = place</div>
  <div id="probes"></div>
  <button id="link">create link from selection</button>
  <div class="row">
    <label>deform <input id="deform" type="range" min="-1" max="1" step="0.05" value="0"></label>
    <span id="deformValue">0</span>
  </div>
  <div class="row">
    <button id="viewEgo">egocentric</button>
    <button id="viewExo">exocentric</button>
  </div>
  <div class="row">
    <input id="autoAttr" placeholder="attribute (e.g. minutesPlayed)">
    <select id="autoObj"><option>max</option><option>min</option></select>
    <button id="autoPlace">auto place</button>
  </div>
  <div id="selection"></div>
`;
document.body.appendChild(panel);

const statusEl = panel.querySelector<HTMLDivElement>("#status")!;
const probesEl = panel.querySelector<HTMLDivElement>("#probes")!;
const selectionEl = panel.querySelector<HTMLDivElement>("#selection")!;
const deformSlider = panel.querySelector<HTMLInputElement>("#deform")!;
const deformValue = panel.querySelector<HTMLSpanElement>("#deformValue")!;

// -- client ------------------------------------------------------------------

let latest: { doc: StateDoc; render: RenderData } | null = null;

const client = new ProbekitClient(serverUrl, {
  onState: (doc, render) => {
    latest = { doc, render };
    view.update(doc, render);
    renderPanel(doc);
  },
  onStatus: (status) => {
    statusEl.textContent = status === "connected" ? `connected to ${serverUrl}` : status;
    statusEl.className = status;
  },
  onServerError: (_seq, code, message) => {
    statusEl.textContent = `server: [${code}] ${message}`;
  },
});
client.connect();

function send(gesture: Gesture): void {
  const spec = gestureToCommand(gesture);
  if (spec) client.sendCommand(spec.kind, spec.payload);
}

// -- probe placement ----------------------------------------------------------

let probeMode = false;
let aimT = 10;
let aimRadius = 2;
const probeModeButton = panel.querySelector<HTMLButtonElement>("#probeMode")!;
probeModeButton.onclick = () => {
  probeMode = !probeMode;
  probeModeButton.textContent = `probe mode: ${probeMode ? "on" : "off"}`;
  controls.enabled = !probeMode;
};

function mouseRay(event: MouseEvent): { origin: number[]; direction: number[] } {
  pointer.set(
    (event.clientX / window.innerWidth) * 2 - 1,
    -(event.clientY / window.innerHeight) * 2 + 1,
  );
  raycaster.setFromCamera(pointer, view.camera);
  const o = raycaster.ray.origin;
  const d = raycaster.ray.direction;
  return { origin: [o.x, o.y, o.z], direction: [d.x, d.y, d.z] };
}

let lastAim = 0;
renderer.domElement.addEventListener("pointermove", (event) => {
  if (!probeMode || latest?.doc.pending_probe == null) return;
  const now = performance.now();
  if (now - lastAim < 50) return; // re-aim at most 20 Hz
  lastAim = now;
  const ray = mouseRay(event);
  send({ type: "aim", ...ray, t: aimT, radius: aimRadius });
});

renderer.domElement.addEventListener("click", (event) => {
  if (probeMode) {
    if (latest?.doc.pending_probe == null) {
      send({ type: "aim", ...mouseRay(event), t: aimT, radius: aimRadius });
    } else {
      send({ type: "place" });
    }
    return;
  }
  // selection: pick global or content nodes
  pointer.set(
    (event.clientX / window.innerWidth) * 2 - 1,
    -(event.clientY / window.innerHeight) * 2 + 1,
  );
  raycaster.setFromCamera(pointer, view.camera);
  const hits = raycaster.intersectObjects(view.pickables, false);
  const target = hits.length ? pickTargetFromHit(hits[0].object) : null;
  if (target) send({ type: "pickNode", node: target.node, source: target.source });
});

renderer.domElement.addEventListener(
  "wheel",
  (event) => {
    if (!probeMode || latest?.doc.pending_probe == null) return;
    event.preventDefault();
    if (event.shiftKey) {
      aimRadius = Math.max(0.1, aimRadius * (event.deltaY < 0 ? 1.1 : 0.9));
    } else {
      aimT = Math.max(0, aimT + (event.deltaY < 0 ? 1 : -1));
    }
    send({ type: "adjust", t: aimT, radius: aimRadius });
  },
  { passive: false },
);

// -- panel actions ---------------------------------------------------------------

panel.querySelector<HTMLButtonElement>("#link")!.onclick = () => send({ type: "linkButton" });
panel.querySelector<HTMLButtonElement>("#viewEgo")!.onclick = () =>
  send({ type: "viewMode", mode: "egocentric" });
panel.querySelector<HTMLButtonElement>("#viewExo")!.onclick = () =>
  send({ type: "viewMode", mode: "exocentric" });
panel.querySelector<HTMLButtonElement>("#autoPlace")!.onclick = () => {
  const attribute = panel.querySelector<HTMLInputElement>("#autoAttr")!.value.trim();
  const objective = panel.querySelector<HTMLSelectElement>("#autoObj")!.value as "max" | "min";
  if (attribute) send({ type: "autoPlace", attribute, objective, radius: aimRadius });
};

function renderPanel(doc: StateDoc): void {
  probesEl.innerHTML = "";
  for (const probe of doc.probes) {
    const row = document.createElement("div");
    row.className = "probeRow";
    const swatch = `rgb(${probe.color.map((c) => Math.round(c * 255)).join(",")})`;
    row.innerHTML = `
      <span class="swatch" style="background:${swatch}"></span>
      <span>${probe.id} (${probe.members.length} nodes)</span>
      <button data-act="tunnel">${probe.active ? "deactivate" : "activate"}</button>
      <button data-act="teleport">teleport</button>
      <button data-act="refresh">refresh</button>
    `;
    row.querySelector<HTMLButtonElement>('[data-act="tunnel"]')!.onclick = () =>
      send({ type: "toggleTunnel", probe: probe.id, active: !probe.active });
    row.querySelector<HTMLButtonElement>('[data-act="teleport"]')!.onclick = () =>
      send({ type: "teleport", probe: probe.id, standoff: probe.ball.radius * 2 });
    row.querySelector<HTMLButtonElement>('[data-act="refresh"]')!.onclick = () =>
      send({ type: "refresh", probe: probe.id });
    probesEl.appendChild(row);
  }
  selectionEl.textContent = doc.selection.length
    ? "selected: " + doc.selection.map((r) => `${r.node}@${r.source}`).join(", ")
    : "selected: none";
}

// -- deform stream -----------------------------------------------------------------

let lastFrame = performance.now();
function animate(): void {
  requestAnimationFrame(animate);
  const now = performance.now();
  const dt = Math.min((now - lastFrame) / 1000, 0.1);
  lastFrame = now;
  const u = parseFloat(deformSlider.value);
  deformValue.textContent = u.toFixed(2);
  if (u !== 0 && latest?.doc.probes.some((p) => p.active)) {
    send({ type: "deform", u, dt });
  }
  controls.update();
  renderer.render(view.scene, view.camera);
}
animate();

window.addEventListener("resize", () => {
  view.camera.aspect = window.innerWidth / window.innerHeight;
  view.camera.updateProjectionMatrix();
  renderer.setSize(window.innerWidth, window.innerHeight);
});
