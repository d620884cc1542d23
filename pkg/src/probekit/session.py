"""Event-sourced interaction engine.

Commands carry a strictly increasing ``seq``; ``SessionState.apply`` validates
a command fully before mutating anything, so a failed command leaves the
state bit-identical (checked by canonical snapshots). Every successful
command returns a list of change records ("deltas") that, folded over a
snapshot document by ``apply_changes``, reconstruct the server state exactly;
derived render data (cue geometry, highlights, content link sets) rides along
in the same list but is ignored by state reconstruction.

Edits made through a probe's content view are edits on the one global graph:
content views are lenses. Node membership of a probe is a frozen snapshot;
link sets inside contents are evaluated live against the graph, so a link
created across two probes immediately shows up in both.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

from .canon import canonical_hash, canonical_json
from .cues import ConeCue, CueParams, TunnelCue, cue_set
from .deform import DEFAULT_SPEED, DeformInput, deform_step, teleport_to_probe
from .errors import (
    InvalidPayloadError,
    InvalidSelectionError,
    MalformedSnapshotError,
    NoPendingProbeError,
    OutOfOrderError,
    ProbekitError,
    SelfLoopError,
    UnknownIdError,
    UnknownProbeError,
)
from .geometry import ViewMode, Viewpoint, quat_normalize
from .graph import Graph, NodeId, canonical_link, id_key
from .layout import LayoutParams, run_layout
from .probes import (
    HIGHLIGHT_FACTOR,
    PALETTE,
    ContentView,
    Probe,
    adjust_probe,
    begin_probe,
    find_extremal_node,
    haptic_active,
    place_probe,
    refresh_content,
    reposition_probe,
    set_probe_active,
)
from .spatial import Ball, Ray, SpatialIndex, point_on_ray

COMMAND_KINDS = (
    "LoadGraph", "RunLayout", "SetViewpoint", "SetViewMode", "BeginProbe",
    "AdjustProbe", "PlaceProbe", "RepositionProbe", "RemoveProbe",
    "SetProbeActive", "MoveContentView", "RotateContentView", "SelectNode",
    "CreateLink", "CreateNode", "RemoveNode", "RemoveLink", "DeformInput",
    "TeleportToProbe", "RefreshContent",
)

# Exocentric preset pulls the viewpoint back far enough to frame the graph's
# bounding sphere at this multiple of its radius.
EXOCENTRIC_FRAME_FACTOR = 2.5

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class SessionCommand:
    seq: int
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SessionCommand":
        try:
            seq = int(data["seq"])
            kind = data["kind"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidPayloadError(f"malformed command: {exc}") from exc
        payload = data.get("payload", {})
        if not isinstance(kind, str) or not isinstance(payload, dict):
            raise InvalidPayloadError("malformed command: bad kind or payload")
        return cls(seq, kind, payload)


@dataclass(frozen=True)
class NodeRef:
    node: NodeId
    source: str  # "global" or a probe id

    def to_dict(self) -> dict[str, Any]:
        return {"node": self.node, "source": self.source}


# -- payload helpers ----------------------------------------------------


def _p_vec3(payload: dict, key: str) -> np.ndarray:
    try:
        value = payload[key]
        arr = np.asarray([float(v) for v in value], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPayloadError(f"payload field {key!r} must be a 3-vector") from exc
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidPayloadError(f"payload field {key!r} must be a finite 3-vector")
    return arr


def _p_quat(payload: dict, key: str) -> np.ndarray:
    try:
        arr = np.asarray([float(v) for v in payload[key]], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPayloadError(f"payload field {key!r} must be a quaternion") from exc
    if arr.shape != (4,) or not np.all(np.isfinite(arr)):
        raise InvalidPayloadError(f"payload field {key!r} must be a finite quaternion")
    try:
        return quat_normalize(arr)
    except ValueError as exc:
        raise InvalidPayloadError(str(exc)) from exc


def _p_num(payload: dict, key: str, default=None) -> float:
    if key not in payload:
        if default is None:
            raise InvalidPayloadError(f"payload field {key!r} is required")
        return float(default)
    try:
        value = float(payload[key])
    except (TypeError, ValueError) as exc:
        raise InvalidPayloadError(f"payload field {key!r} must be a number") from exc
    if not math.isfinite(value):
        raise InvalidPayloadError(f"payload field {key!r} must be finite")
    return value


def _p_node_id(payload: dict, key: str) -> NodeId:
    try:
        value = payload[key]
    except KeyError as exc:
        raise InvalidPayloadError(f"payload field {key!r} is required") from exc
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise InvalidPayloadError(f"payload field {key!r} must be a node id")
    return value


def _p_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise InvalidPayloadError(f"payload field {key!r} must be a string")
    return value


def _p_ray(payload: dict, key: str = "ray") -> Ray:
    data = payload.get(key)
    if not isinstance(data, dict):
        raise InvalidPayloadError(f"payload field {key!r} must be a ray object")
    try:
        return Ray.pointing(_p_vec3(data, "origin"), _p_vec3(data, "direction"))
    except ValueError as exc:
        raise InvalidPayloadError(str(exc)) from exc


# -- document builders ---------------------------------------------------


def _vec_doc(v) -> list[float]:
    return [float(x) for x in v]


def _viewpoint_doc(vp: Viewpoint) -> dict[str, Any]:
    return {
        "position": _vec_doc(vp.position),
        "orientation": _vec_doc(vp.orientation),
        "mode": vp.mode.value,
    }


def _viewpoint_from_doc(doc: dict) -> Viewpoint:
    return Viewpoint(np.asarray(doc["position"], dtype=np.float64),
                     quat_normalize(np.asarray(doc["orientation"], dtype=np.float64)),
                     ViewMode(doc["mode"]))


def _probe_doc(probe: Probe) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": probe.id,
        "ball": {"center": _vec_doc(probe.ball.center), "radius": float(probe.ball.radius)},
        "color": _vec_doc(probe.color),
        "active": bool(probe.active),
        "placed": bool(probe.placed),
        "members": list(probe.members),
    }
    if probe.content is not None:
        content = probe.content
        doc["content"] = {
            "anchor": _vec_doc(content.anchor),
            "user_offset": _vec_doc(content.user_offset),
            "rotation": _vec_doc(content.rotation),
            "scale": float(content.scale),
            "captured": [[node_id, _vec_doc(pos)]
                         for node_id, pos in sorted(content.captured_positions.items(),
                                                    key=lambda kv: id_key(kv[0]))],
        }
    else:
        doc["content"] = None
    if probe.ray is not None:
        doc["ray"] = {"origin": _vec_doc(probe.ray.origin),
                      "direction": _vec_doc(probe.ray.direction)}
        doc["t"] = float(probe.t)
    return doc


def _probe_from_doc(doc: dict) -> Probe:
    ball = Ball(np.asarray(doc["ball"]["center"], dtype=np.float64),
                float(doc["ball"]["radius"]))
    probe = Probe(doc["id"], ball, tuple(float(c) for c in doc["color"]),
                  active=bool(doc["active"]), placed=bool(doc["placed"]),
                  members=tuple(doc["members"]))
    content = doc.get("content")
    if content is not None:
        probe.content = ContentView(
            probe.id,
            float(content["scale"]),
            anchor=np.asarray(content["anchor"], dtype=np.float64),
            user_offset=np.asarray(content["user_offset"], dtype=np.float64),
            rotation=quat_normalize(np.asarray(content["rotation"], dtype=np.float64)),
            captured_positions={node_id: np.asarray(pos, dtype=np.float64)
                                for node_id, pos in content["captured"]},
        )
    if "ray" in doc:
        probe.ray = Ray.pointing(np.asarray(doc["ray"]["origin"], dtype=np.float64),
                                 np.asarray(doc["ray"]["direction"], dtype=np.float64))
        probe.t = float(doc.get("t", 0.0))
    return probe


def _cue_doc(cue: ConeCue | TunnelCue) -> dict[str, Any]:
    if isinstance(cue, ConeCue):
        return {
            "type": "cone", "probe": cue.probe_id, "visible": bool(cue.visible),
            "apex": _vec_doc(cue.apex), "axis": _vec_doc(cue.axis),
            "opacity": float(cue.opacity), "color": _vec_doc(cue.color),
        }
    return {
        "type": "tunnel", "probe": cue.probe_id, "visible": bool(cue.visible),
        "start": _vec_doc(cue.start), "end": _vec_doc(cue.end),
        "start_radius": float(cue.start_radius), "end_radius": float(cue.end_radius),
        "color": _vec_doc(cue.color),
    }


# -- the state machine ----------------------------------------------------


class SessionState:
    """Deterministic state machine over the full module stack."""

    def __init__(self, graph: Graph | None = None,
                 cue_params: CueParams | None = None,
                 kappa: float = DEFAULT_SPEED):
        self.graph = graph if graph is not None else Graph()
        self.probes: dict[str, Probe] = {}
        self.pending_probe: Probe | None = None
        self.viewpoint = Viewpoint()
        self.selection: list[NodeRef] = []
        self.haptic = False
        self.cue_params = cue_params if cue_params is not None else CueParams()
        self.kappa = float(kappa)
        self.applied_seq = 0
        self.probe_seq = 0
        self.palette_index = 0
        self._index: SpatialIndex | None = None

    # -- infrastructure --------------------------------------------------

    @property
    def index(self) -> SpatialIndex:
        if self._index is None:
            self._index = SpatialIndex(self.graph)
        return self._index

    def _next_probe_id(self) -> str:
        self.probe_seq += 1
        return f"p{self.probe_seq}"

    def _next_color(self) -> tuple[float, float, float]:
        color = PALETTE[self.palette_index % len(PALETTE)]
        self.palette_index += 1
        return color

    def _probe(self, payload: dict) -> Probe:
        probe_id = payload.get("probe")
        probe = self.probes.get(probe_id)
        if probe is None:
            raise UnknownProbeError(f"unknown probe {probe_id!r}")
        return probe

    def placed_probes(self) -> list[Probe]:
        return [self.probes[k] for k in sorted(self.probes, key=id_key)]

    def highlights(self) -> dict[str, Any]:
        """First probe (by id) containing a node/link claims its highlight."""
        node_color: dict[NodeId, tuple[float, float, float]] = {}
        link_color: dict[tuple, tuple[float, float, float]] = {}
        for probe in self.placed_probes():
            members = set(probe.members)
            for node_id in probe.members:
                node_color.setdefault(node_id, probe.color)
            for a, b in self.graph.links_among(members & set(self.graph.node_ids())):
                link_color.setdefault((a, b), probe.color)
        nodes = [{"id": node_id, "color": _vec_doc(color), "factor": HIGHLIGHT_FACTOR}
                 for node_id, color in sorted(node_color.items(), key=lambda kv: id_key(kv[0]))]
        links = [{"source": a, "target": b, "color": _vec_doc(color)}
                 for (a, b), color in sorted(link_color.items(),
                                             key=lambda kv: (id_key(kv[0][0]), id_key(kv[0][1])))]
        return {"nodes": nodes, "links": links}

    def content_links_doc(self) -> list[dict[str, Any]]:
        docs = []
        for probe in self.placed_probes():
            links = self.graph.links_among(probe.members)
            docs.append({"probe": probe.id,
                         "links": [{"source": a, "target": b}
                                   for a, b in sorted(links, key=lambda l: (id_key(l[0]),
                                                                            id_key(l[1])))]})
        return docs

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        return {
            "version": SNAPSHOT_VERSION,
            "applied_seq": self.applied_seq,
            "graph": self.graph.to_dict(),
            "viewpoint": _viewpoint_doc(self.viewpoint),
            "probes": [_probe_doc(self.probes[k]) for k in sorted(self.probes, key=id_key)],
            "pending_probe": _probe_doc(self.pending_probe) if self.pending_probe else None,
            "selection": [ref.to_dict() for ref in self.selection],
            "haptic": bool(self.haptic),
            "cue_params": self.cue_params.to_dict(),
            "deform": {"kappa": self.kappa},
            "counters": {"probe_seq": self.probe_seq, "palette": self.palette_index},
        }

    def render_data(self) -> dict[str, Any]:
        """Derived render payload (not state): cue geometry, highlights, and
        per-probe content link sets, as shipped to thin clients."""
        return {
            "cues": [_cue_doc(c) for c in cue_set(self.viewpoint, self.placed_probes(),
                                                  self.cue_params)],
            "highlights": self.highlights(),
            "contents": self.content_links_doc(),
        }

    def canonical(self) -> str:
        return canonical_json(self.snapshot())

    def state_hash(self) -> str:
        return canonical_hash(self.snapshot())

    @classmethod
    def restore(cls, doc: dict[str, Any]) -> "SessionState":
        try:
            if doc.get("version") != SNAPSHOT_VERSION:
                raise MalformedSnapshotError(f"unsupported snapshot version {doc.get('version')!r}")
            state = cls(Graph.from_dict(doc["graph"]),
                        CueParams.from_dict(doc["cue_params"]),
                        float(doc["deform"]["kappa"]))
            state.viewpoint = _viewpoint_from_doc(doc["viewpoint"])
            for probe_doc in doc["probes"]:
                probe = _probe_from_doc(probe_doc)
                state.probes[probe.id] = probe
            pending = doc.get("pending_probe")
            state.pending_probe = _probe_from_doc(pending) if pending else None
            state.selection = [NodeRef(ref["node"], ref["source"]) for ref in doc["selection"]]
            state.haptic = bool(doc["haptic"])
            state.applied_seq = int(doc["applied_seq"])
            counters = doc["counters"]
            state.probe_seq = int(counters["probe_seq"])
            state.palette_index = int(counters["palette"])
            return state
        except MalformedSnapshotError:
            raise
        except (KeyError, TypeError, ValueError, ProbekitError) as exc:
            raise MalformedSnapshotError(f"cannot restore snapshot: {exc}") from exc

    # -- command application -------------------------------------------------

    def apply(self, command: SessionCommand) -> list[dict[str, Any]]:
        """Validate and apply one command; returns its change records.

        Raises a ProbekitError (leaving the state untouched) when the command
        is out of order or invalid.
        """
        if command.seq != self.applied_seq + 1:
            raise OutOfOrderError(
                f"expected seq {self.applied_seq + 1}, got {command.seq}")
        handler = _HANDLERS.get(command.kind)
        if handler is None:
            raise InvalidPayloadError(f"unknown command kind {command.kind!r}")
        changes = handler(self, command.payload)
        self.applied_seq = command.seq
        new_haptic = haptic_active(self.pending_probe, self.index)
        if new_haptic != self.haptic:
            self.haptic = new_haptic
            changes.append({"entity": "haptic", "active": self.haptic})
        changes.append({"entity": "cues",
                        "cues": [_cue_doc(c) for c in cue_set(self.viewpoint,
                                                              self.placed_probes(),
                                                              self.cue_params)]})
        if command.kind in _CONTENT_AFFECTING:
            changes.append({"entity": "highlights", **self.highlights()})
            changes.append({"entity": "content_links", "contents": self.content_links_doc()})
        return changes

    # -- handlers, one per command kind --------------------------------------

    def _cmd_load_graph(self, payload: dict) -> list[dict]:
        if "graph" in payload:
            graph = Graph.from_dict(payload["graph"], strict=bool(payload.get("strict", False)))
        elif "path" in payload:
            graph = Graph.load(_p_str(payload, "path"), strict=bool(payload.get("strict", False)))
        else:
            raise InvalidPayloadError("LoadGraph needs 'graph' or 'path'")
        changes: list[dict] = [{"entity": "probe_removed", "id": probe_id}
                               for probe_id in sorted(self.probes, key=id_key)]
        self.graph = graph
        self._index = None
        self.probes.clear()
        self.pending_probe = None
        self.selection = []
        changes.append({"entity": "graph", "graph": self.graph.to_dict()})
        changes.append({"entity": "pending_probe", "probe": None})
        changes.append({"entity": "selection", "selection": []})
        return changes

    def _cmd_run_layout(self, payload: dict) -> list[dict]:
        overrides = {}
        for key in ("link_distance", "link_strength", "many_body_strength", "theta",
                    "alpha_start", "alpha_min", "alpha_decay", "velocity_decay",
                    "center_strength"):
            if key in payload:
                overrides[key] = _p_num(payload, key)
        try:
            params = LayoutParams(seed=int(payload.get("seed", 0)),
                                  max_iterations=int(payload.get("iters", 300)),
                                  **overrides)
        except (TypeError, ValueError) as exc:
            raise InvalidPayloadError(f"bad layout parameters: {exc}") from exc
        run_layout(self.graph, params, from_current=bool(payload.get("from_current", False)))
        return [self._positions_delta()]

    def _positions_delta(self) -> dict:
        ids, positions = self.graph.get_positions()
        order = sorted(range(len(ids)), key=lambda i: id_key(ids[i]))
        return {"entity": "positions",
                "positions": [[ids[i], _vec_doc(positions[i])] for i in order]}

    def _cmd_set_viewpoint(self, payload: dict) -> list[dict]:
        position = _p_vec3(payload, "position")
        orientation = _p_quat(payload, "orientation") if "orientation" in payload \
            else self.viewpoint.orientation
        self.viewpoint = Viewpoint(position, orientation, self.viewpoint.mode)
        return [{"entity": "viewpoint", "viewpoint": _viewpoint_doc(self.viewpoint)}]

    def _cmd_set_view_mode(self, payload: dict) -> list[dict]:
        mode_name = _p_str(payload, "mode")
        try:
            mode = ViewMode(mode_name)
        except ValueError as exc:
            raise InvalidPayloadError(f"unknown view mode {mode_name!r}") from exc
        center, radius = self.graph.bounding_sphere()
        direction = self.viewpoint.view_direction()
        if mode is ViewMode.EXOCENTRIC:
            distance = EXOCENTRIC_FRAME_FACTOR * max(radius, 1.0)
            position = center - distance * direction
        else:
            position = center
        self.viewpoint = Viewpoint(position, self.viewpoint.orientation, mode)
        return [{"entity": "viewpoint", "viewpoint": _viewpoint_doc(self.viewpoint)}]

    def _cmd_begin_probe(self, payload: dict) -> list[dict]:
        ray = _p_ray(payload)
        t = _p_num(payload, "t")
        radius = _p_num(payload, "radius")
        Ball(point_on_ray(ray, t), radius)  # validate before consuming counters
        probe = begin_probe(self._next_probe_id(), self._next_color(), ray, t, radius)
        self.pending_probe = probe
        return [
            {"entity": "pending_probe", "probe": _probe_doc(probe)},
            {"entity": "counters", "probe_seq": self.probe_seq, "palette": self.palette_index},
        ]

    def _cmd_adjust_probe(self, payload: dict) -> list[dict]:
        if self.pending_probe is None:
            raise NoPendingProbeError("no probe is being positioned")
        adjust_probe(self.pending_probe, _p_num(payload, "t"), _p_num(payload, "radius"))
        return [{"entity": "pending_probe", "probe": _probe_doc(self.pending_probe)}]

    def _cmd_place_probe(self, payload: dict) -> list[dict]:
        if "auto" in payload:
            spec = payload["auto"]
            if not isinstance(spec, dict):
                raise InvalidPayloadError("PlaceProbe 'auto' must be an object")
            attribute = _p_str(spec, "attribute")
            objective = spec.get("objective", "max")
            if objective not in ("max", "min"):
                raise InvalidPayloadError("auto objective must be 'max' or 'min'")
            radius = _p_num(spec, "radius")
            if radius <= 0:
                raise InvalidPayloadError("auto radius must be > 0")
            target = find_extremal_node(self.graph, attribute, objective)
            probe = Probe(self._next_probe_id(), Ball(self.graph.position(target), radius),
                          self._next_color())
            place_probe(probe, self.graph, self.index, self.viewpoint)
            self.probes[probe.id] = probe
            return [
                {"entity": "probe", "probe": _probe_doc(probe)},
                {"entity": "counters", "probe_seq": self.probe_seq,
                 "palette": self.palette_index},
            ]
        if self.pending_probe is None:
            raise NoPendingProbeError("no probe is being positioned")
        probe = place_probe(self.pending_probe, self.graph, self.index, self.viewpoint)
        self.pending_probe = None
        self.probes[probe.id] = probe
        return [
            {"entity": "probe", "probe": _probe_doc(probe)},
            {"entity": "pending_probe", "probe": None},
        ]

    def _cmd_reposition_probe(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        ball_doc = payload.get("ball")
        if not isinstance(ball_doc, dict):
            raise InvalidPayloadError("RepositionProbe needs a 'ball' object")
        ball = Ball(_p_vec3(ball_doc, "center"), _p_num(ball_doc, "radius"))
        reposition_probe(probe, ball, self.graph, self.index, self.viewpoint)
        return [{"entity": "probe", "probe": _probe_doc(probe)}]

    def _cmd_remove_probe(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        del self.probes[probe.id]
        changes: list[dict] = [{"entity": "probe_removed", "id": probe.id}]
        kept = [ref for ref in self.selection if ref.source != probe.id]
        if len(kept) != len(self.selection):
            self.selection = kept
            changes.append({"entity": "selection",
                            "selection": [ref.to_dict() for ref in self.selection]})
        return changes

    def _cmd_set_probe_active(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        flag = payload.get("active")
        if not isinstance(flag, bool):
            raise InvalidPayloadError("SetProbeActive needs a boolean 'active'")
        set_probe_active(probe, flag)
        return [{"entity": "probe", "probe": _probe_doc(probe)}]

    def _cmd_move_content_view(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        if probe.content is None:
            raise UnknownProbeError(f"probe {probe.id} has no content view")
        probe.content.user_offset = _p_vec3(payload, "offset")
        return [{"entity": "probe", "probe": _probe_doc(probe)}]

    def _cmd_rotate_content_view(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        if probe.content is None:
            raise UnknownProbeError(f"probe {probe.id} has no content view")
        probe.content.rotation = _p_quat(payload, "rotation")
        return [{"entity": "probe", "probe": _probe_doc(probe)}]

    def _cmd_select_node(self, payload: dict) -> list[dict]:
        node_id = _p_node_id(payload, "node")
        source = payload.get("source", "global")
        if not isinstance(source, str):
            raise InvalidPayloadError("selection source must be 'global' or a probe id")
        if not self.graph.has_node(node_id):
            raise UnknownIdError(f"unknown node id {node_id!r}")
        if source != "global":
            probe = self.probes.get(source)
            if probe is None:
                raise UnknownProbeError(f"unknown probe {source!r}")
            if node_id not in probe.members:
                raise InvalidSelectionError(
                    f"node {node_id!r} is not in probe {source!r}'s content")
        self.selection.append(NodeRef(node_id, source))
        self.selection = self.selection[-2:]
        return [{"entity": "selection",
                 "selection": [ref.to_dict() for ref in self.selection]}]

    def _cmd_create_link(self, payload: dict) -> list[dict]:
        if len(self.selection) != 2:
            raise InvalidSelectionError("creating a link needs exactly 2 selected nodes")
        a, b = self.selection[0].node, self.selection[1].node
        if a == b:
            raise SelfLoopError("selected nodes must be distinct")
        self.graph.add_link(a, b)  # may raise DuplicateLink / UnknownId
        self.selection = []
        pair = canonical_link(a, b)
        return [
            {"entity": "link_added", "source": pair[0], "target": pair[1]},
            {"entity": "selection", "selection": []},
        ]

    def _cmd_create_node(self, payload: dict) -> list[dict]:
        node_id = _p_node_id(payload, "id")
        position = _p_vec3(payload, "position") if "position" in payload else np.zeros(3)
        attributes = payload.get("attributes")
        self.graph.add_node(node_id, position, attributes)
        node = self.graph.node(node_id)
        doc: dict[str, Any] = {"id": node.id, "pos": list(node.position)}
        if node.attributes:
            doc["attrs"] = node.attributes
        return [{"entity": "node_added", "node": doc}]

    def _cmd_remove_node(self, payload: dict) -> list[dict]:
        node_id = _p_node_id(payload, "node")
        source = payload.get("source", "global")
        if not self.graph.has_node(node_id):
            raise UnknownIdError(f"unknown node id {node_id!r}")
        if source != "global":
            probe = self.probes.get(source)
            if probe is None:
                raise UnknownProbeError(f"unknown probe {source!r}")
            if node_id not in probe.members:
                raise InvalidSelectionError(
                    f"node {node_id!r} is not in probe {source!r}'s content")
        changes: list[dict] = []
        for a, b in sorted(self.graph.links_among({node_id} | self.graph.neighbors(node_id)),
                           key=lambda l: (id_key(l[0]), id_key(l[1]))):
            if a == node_id or b == node_id:
                changes.append({"entity": "link_removed", "source": a, "target": b})
        self.graph.remove_node(node_id)
        changes.append({"entity": "node_removed", "id": node_id})
        for probe in self.placed_probes():
            if node_id in probe.members:
                probe.members = tuple(m for m in probe.members if m != node_id)
                if probe.content is not None:
                    probe.content.captured_positions.pop(node_id, None)
                changes.append({"entity": "probe", "probe": _probe_doc(probe)})
        kept = [ref for ref in self.selection if ref.node != node_id]
        if len(kept) != len(self.selection):
            self.selection = kept
            changes.append({"entity": "selection",
                            "selection": [ref.to_dict() for ref in self.selection]})
        return changes

    def _cmd_remove_link(self, payload: dict) -> list[dict]:
        a = _p_node_id(payload, "source")
        b = _p_node_id(payload, "target")
        self.graph.remove_link(a, b)
        pair = canonical_link(a, b)
        return [{"entity": "link_removed", "source": pair[0], "target": pair[1]}]

    def _cmd_deform_input(self, payload: dict) -> list[dict]:
        deform = DeformInput(_p_num(payload, "u"), _p_num(payload, "dt"),
                             _p_num(payload, "kappa", self.kappa))
        field = deform_step(self.graph, self.placed_probes(), self.viewpoint, deform)
        changes = [self._positions_delta()]
        for probe_id in field.probe_ids:
            changes.append({"entity": "probe", "probe": _probe_doc(self.probes[probe_id])})
        return changes

    def _cmd_teleport(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        standoff = _p_num(payload, "standoff", 0.0)
        self.viewpoint = teleport_to_probe(self.viewpoint, probe, standoff)
        return [{"entity": "viewpoint", "viewpoint": _viewpoint_doc(self.viewpoint)}]

    def _cmd_refresh_content(self, payload: dict) -> list[dict]:
        probe = self._probe(payload)
        refresh_content(probe, self.graph, self.index, self.viewpoint)
        return [{"entity": "probe", "probe": _probe_doc(probe)}]


_HANDLERS: dict[str, Callable[[SessionState, dict], list[dict]]] = {
    "LoadGraph": SessionState._cmd_load_graph,
    "RunLayout": SessionState._cmd_run_layout,
    "SetViewpoint": SessionState._cmd_set_viewpoint,
    "SetViewMode": SessionState._cmd_set_view_mode,
    "BeginProbe": SessionState._cmd_begin_probe,
    "AdjustProbe": SessionState._cmd_adjust_probe,
    "PlaceProbe": SessionState._cmd_place_probe,
    "RepositionProbe": SessionState._cmd_reposition_probe,
    "RemoveProbe": SessionState._cmd_remove_probe,
    "SetProbeActive": SessionState._cmd_set_probe_active,
    "MoveContentView": SessionState._cmd_move_content_view,
    "RotateContentView": SessionState._cmd_rotate_content_view,
    "SelectNode": SessionState._cmd_select_node,
    "CreateLink": SessionState._cmd_create_link,
    "CreateNode": SessionState._cmd_create_node,
    "RemoveNode": SessionState._cmd_remove_node,
    "RemoveLink": SessionState._cmd_remove_link,
    "DeformInput": SessionState._cmd_deform_input,
    "TeleportToProbe": SessionState._cmd_teleport,
    "RefreshContent": SessionState._cmd_refresh_content,
}

# Commands after which membership/structure-derived render data is re-shipped.
_CONTENT_AFFECTING = frozenset({
    "LoadGraph", "PlaceProbe", "RepositionProbe", "RemoveProbe", "RefreshContent",
    "CreateLink", "CreateNode", "RemoveNode", "RemoveLink", "RunLayout",
})


# -- replay and logs -------------------------------------------------------


def replay(commands: Iterable[SessionCommand],
           initial_graph: Graph | None = None) -> SessionState:
    """Fold apply over the commands from an initial (usually empty) state.

    Command errors propagate; callers that need error tolerance apply
    commands one by one themselves.
    """
    state = SessionState(initial_graph.copy() if initial_graph is not None else None)
    for command in commands:
        state.apply(command)
    return state


def parse_script(text: str) -> list[SessionCommand]:
    """Parse a JSON-lines session log."""
    commands = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidPayloadError(f"line {lineno}: invalid JSON: {exc}") from exc
        commands.append(SessionCommand.from_dict(data))
    return commands


def dump_script(commands: Iterable[SessionCommand]) -> str:
    return "".join(json.dumps(c.to_dict()) + "\n" for c in commands)


# -- delta application (mirrors the thin client) ----------------------------


def apply_changes(doc: dict[str, Any], seq: int, changes: list[dict[str, Any]]) -> dict[str, Any]:
    """Fold one delta into a snapshot document; the result matches the
    server's snapshot after the same command (the protocol echo law)."""

    def node_sort(nodes):
        nodes.sort(key=lambda n: (str(n["id"]), type(n["id"]).__name__))

    def link_sort(links):
        links.sort(key=lambda l: ((str(l["source"]), type(l["source"]).__name__),
                                  (str(l["target"]), type(l["target"]).__name__)))

    doc = json.loads(json.dumps(doc))  # deep copy, JSON types only
    doc["applied_seq"] = seq
    graph = doc["graph"]
    for change in changes:
        entity = change["entity"]
        if entity == "graph":
            doc["graph"] = json.loads(json.dumps(change["graph"]))
            graph = doc["graph"]
        elif entity == "positions":
            pos = {(str(i), type(i).__name__): p for i, p in change["positions"]}
            for node in graph["nodes"]:
                key = (str(node["id"]), type(node["id"]).__name__)
                if key in pos:
                    node["pos"] = list(pos[key])
        elif entity == "node_added":
            graph["nodes"].append(json.loads(json.dumps(change["node"])))
            node_sort(graph["nodes"])
        elif entity == "node_removed":
            graph["nodes"] = [n for n in graph["nodes"] if n["id"] != change["id"]]
        elif entity == "link_added":
            graph["links"].append({"source": change["source"], "target": change["target"]})
            link_sort(graph["links"])
        elif entity == "link_removed":
            graph["links"] = [l for l in graph["links"]
                              if not (l["source"] == change["source"]
                                      and l["target"] == change["target"])]
        elif entity == "viewpoint":
            doc["viewpoint"] = json.loads(json.dumps(change["viewpoint"]))
        elif entity == "pending_probe":
            doc["pending_probe"] = json.loads(json.dumps(change["probe"]))
        elif entity == "probe":
            probe_doc = json.loads(json.dumps(change["probe"]))
            doc["probes"] = [p for p in doc["probes"] if p["id"] != probe_doc["id"]]
            doc["probes"].append(probe_doc)
            doc["probes"].sort(key=lambda p: p["id"])
        elif entity == "probe_removed":
            doc["probes"] = [p for p in doc["probes"] if p["id"] != change["id"]]
        elif entity == "selection":
            doc["selection"] = json.loads(json.dumps(change["selection"]))
        elif entity == "haptic":
            doc["haptic"] = bool(change["active"])
        elif entity == "counters":
            doc["counters"] = {"probe_seq": change["probe_seq"], "palette": change["palette"]}
        elif entity in ("cues", "highlights", "content_links"):
            pass  # derived render data, not state
        else:
            raise MalformedSnapshotError(f"unknown delta entity {entity!r}")
    return doc
