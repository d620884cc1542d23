"""Probe lifecycle: ray-based placement, scaling, content extraction,
activation, attribute-driven auto-placement, and content refresh.

A placed probe freezes its member-node snapshot and their global positions
at extraction time; global edits and deformation do not touch the snapshot
until refresh_content or reposition_probe re-extracts it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentStateError,
    NonPositiveRadiusError,
    NotPlacedError,
    UnknownAttributeError,
)
from .geometry import Viewpoint, quat_identity, quat_rotate
from .graph import Graph, NodeId, Subgraph, id_key
from .spatial import Ball, Ray, SpatialIndex, point_on_ray

# Content view display constants: the extracted subgraph is shown inside a
# sphere of DISPLAY_RADIUS world units anchored ANCHOR_DISTANCE in front of
# the viewpoint; scale = DISPLAY_RADIUS / ball radius.
DISPLAY_RADIUS = 0.3
ANCHOR_DISTANCE = 0.6

# Render hint for member nodes/links in the global graph.
HIGHLIGHT_FACTOR = 1.5

# Eight distinguishable colors, cycled by probe creation order.
PALETTE: tuple[tuple[float, float, float], ...] = (
    (0.894, 0.102, 0.110),
    (0.216, 0.494, 0.722),
    (0.302, 0.686, 0.290),
    (0.596, 0.306, 0.639),
    (1.000, 0.498, 0.000),
    (0.969, 0.506, 0.749),
    (0.651, 0.337, 0.157),
    (0.600, 0.600, 0.200),
)


@dataclass
class ContentView:
    """User-anchored scaled display of a probe's extracted subgraph.

    world_center = viewpoint position + R(orientation) * (anchor + user_offset),
    so the view follows the viewpoint and can be repositioned relative to it.
    Content node positions are the captured global positions mapped by the
    similarity transform (scale, rotation, translation to world_center).
    """

    probe_id: str
    scale: float
    anchor: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -ANCHOR_DISTANCE]))
    user_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=quat_identity)
    captured_positions: dict[NodeId, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.scale <= 0.0:
            raise NonPositiveRadiusError("content scale must be > 0")

    def world_center(self, viewpoint: Viewpoint) -> np.ndarray:
        return viewpoint.position + quat_rotate(viewpoint.orientation,
                                                self.anchor + self.user_offset)

    def content_positions(self, viewpoint: Viewpoint,
                          ball_center: np.ndarray) -> dict[NodeId, np.ndarray]:
        """World positions of the displayed content copies."""
        center = self.world_center(viewpoint)
        return {
            node_id: center + self.scale * quat_rotate(self.rotation, p - ball_center)
            for node_id, p in self.captured_positions.items()
        }

    def invert_position(self, viewpoint: Viewpoint, ball_center: np.ndarray,
                        content_position: np.ndarray) -> np.ndarray:
        """Map a displayed content position back into global coordinates."""
        center = self.world_center(viewpoint)
        q = self.rotation
        conj = np.array([q[0], -q[1], -q[2], -q[3]])
        return ball_center + quat_rotate(conj, (content_position - center) / self.scale)


@dataclass
class Probe:
    id: str
    ball: Ball
    color: tuple[float, float, float]
    active: bool = False
    placed: bool = False
    content: ContentView | None = None
    members: tuple[NodeId, ...] = ()
    ray: Ray | None = None  # creation ray, kept while unplaced
    t: float = 0.0


def begin_probe(probe_id: str, color: tuple[float, float, float],
                ray: Ray, t: float, radius: float) -> Probe:
    """Create an unplaced probe centered at point_on_ray(ray, t)."""
    center = point_on_ray(ray, t)  # NegativeParameter on t < 0
    ball = Ball(center, radius)  # NonPositiveRadius on radius <= 0
    return Probe(probe_id, ball, color, ray=ray, t=float(t))


def adjust_probe(probe: Probe, new_t: float, new_radius: float) -> Probe:
    """Rescale / retranslate an unplaced probe along its creation ray."""
    if probe.placed:
        raise InconsistentStateError("adjust_probe applies to unplaced probes")
    if probe.ray is None:
        raise InconsistentStateError("probe has no creation ray")
    probe.ball = Ball(point_on_ray(probe.ray, new_t), new_radius)
    probe.t = float(new_t)
    return probe


def haptic_active(pending: Probe | None, index: SpatialIndex) -> bool:
    """True iff an unplaced probe is being positioned and encloses a node."""
    if pending is None or pending.placed:
        return False
    return bool(index.nodes_in_ball(pending.ball))


def _extract(probe: Probe, graph: Graph, index: SpatialIndex) -> None:
    members = index.nodes_in_ball(probe.ball)
    probe.members = tuple(sorted(members, key=id_key))
    captured = {node_id: graph.position(node_id) for node_id in probe.members}
    if probe.content is None:
        probe.content = ContentView(probe.id, DISPLAY_RADIUS / probe.ball.radius,
                                    captured_positions=captured)
    else:
        probe.content.captured_positions = captured


def place_probe(probe: Probe, graph: Graph, index: SpatialIndex,
                viewpoint: Viewpoint) -> Probe:
    """Fix the probe in place and extract its content view."""
    if probe.placed:
        raise InconsistentStateError("probe already placed")
    probe.content = None
    _extract(probe, graph, index)
    probe.placed = True
    probe.ray = None
    return probe


def reposition_probe(probe: Probe, new_ball: Ball, graph: Graph,
                     index: SpatialIndex, viewpoint: Viewpoint) -> Probe:
    """Move a placed probe and re-extract membership and content."""
    if not probe.placed:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    probe.ball = new_ball
    probe.content = None
    _extract(probe, graph, index)
    return probe


def set_probe_active(probe: Probe, active: bool) -> Probe:
    if not probe.placed:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    probe.active = bool(active)
    return probe


def refresh_content(probe: Probe, graph: Graph, index: SpatialIndex,
                    viewpoint: Viewpoint) -> Probe:
    """Recompute membership from current positions; the view's placement
    (anchor, offset, rotation, scale) is preserved."""
    if not probe.placed:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    _extract(probe, graph, index)
    return probe


def find_extremal_node(graph: Graph, attribute: str, objective: str) -> NodeId:
    """Node holding the extremal value of an attribute.

    Numeric values win over strings when both occur; ties break toward the
    lexicographically smallest node id.
    """
    if objective not in ("max", "min"):
        raise ValueError(f"objective must be 'max' or 'min', got {objective!r}")
    numeric: list[tuple[float, NodeId]] = []
    textual: list[tuple[str, NodeId]] = []
    for node_id in graph.node_ids():
        attrs = graph.attributes(node_id)
        if attribute not in attrs:
            continue
        value = attrs[attribute]
        if isinstance(value, bool) or isinstance(value, str):
            textual.append((str(value), node_id))
        else:
            numeric.append((float(value), node_id))
    pool = numeric if numeric else textual
    if not pool:
        raise UnknownAttributeError(f"attribute {attribute!r} is absent from every node")
    pick = max if objective == "max" else min
    best_value = pick(value for value, _ in pool)
    candidates = [node_id for value, node_id in pool if value == best_value]
    return min(candidates, key=id_key)


def auto_place_probe(probe_id: str, color: tuple[float, float, float],
                     graph: Graph, index: SpatialIndex, attribute: str,
                     objective: str, radius: float, viewpoint: Viewpoint) -> Probe:
    """Place a probe centered on the node with the extremal attribute value."""
    target = find_extremal_node(graph, attribute, objective)
    probe = Probe(probe_id, Ball(graph.position(target), radius), color)
    return place_probe(probe, graph, index, viewpoint)


def content_subgraph(probe: Probe, graph: Graph) -> Subgraph:
    """The induced subgraph over the probe's frozen member snapshot, with the
    link set evaluated against the current graph."""
    if not probe.placed:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    return graph.induced_subgraph(probe.members)
