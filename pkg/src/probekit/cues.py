"""Guidance cue geometry: directional cones toward off-axis probes and
truncated-cone tunnels linking each probe to its content view."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirectionError, DegenerateViewError, NotPlacedError
from .geometry import Viewpoint, angle_between, normalize, rotate_toward
from .graph import id_key
from .probes import Probe


@dataclass(frozen=True)
class CueParams:
    """All cue constants in one record (also carried in session snapshots)."""

    cone_angle_threshold: float = math.radians(30.0)  # show cone when alpha exceeds this
    cone_rotation: float = math.radians(20.0)  # fixed rotation of v toward w
    cone_distance: float = 0.5  # apex distance from the viewpoint
    opacity_reference: float = 10.0  # distance at which opacity halves
    opacity_floor: float = 0.1

    def to_dict(self) -> dict:
        return {
            "cone_angle_threshold": self.cone_angle_threshold,
            "cone_rotation": self.cone_rotation,
            "cone_distance": self.cone_distance,
            "opacity_reference": self.opacity_reference,
            "opacity_floor": self.opacity_floor,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CueParams":
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class ConeCue:
    probe_id: str
    visible: bool
    apex: np.ndarray
    axis: np.ndarray  # unit vector from the apex toward the probe
    opacity: float
    color: tuple[float, float, float]


@dataclass(frozen=True)
class TunnelCue:
    probe_id: str
    visible: bool  # tracks probe activation
    start: np.ndarray  # on the content display sphere surface
    end: np.ndarray  # on the probe ball surface
    start_radius: float
    end_radius: float
    color: tuple[float, float, float]


def compute_cone(viewpoint: Viewpoint, probe: Probe, params: CueParams) -> ConeCue:
    """Cone placement: rotate the view direction toward the probe by the fixed
    angle, put the apex cone_distance along the result, and point the axis at
    the probe. Visible only when the view-to-probe angle strictly exceeds the
    threshold; opacity falls off with distance down to the floor."""
    if not probe.placed:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    w = probe.ball.center - viewpoint.position
    dist = float(np.linalg.norm(w))
    if dist < 1e-12:
        raise DegenerateViewError("viewpoint coincides with the probe center")
    v = viewpoint.view_direction()
    alpha = angle_between(v, w)
    visible = alpha > params.cone_angle_threshold
    placement = rotate_toward(v, w, params.cone_rotation, viewpoint.up())
    apex = viewpoint.position + params.cone_distance * placement
    to_probe = probe.ball.center - apex
    if float(np.linalg.norm(to_probe)) < 1e-12:
        to_probe = w
    axis = normalize(to_probe)
    opacity = max(params.opacity_floor, 1.0 / (1.0 + dist / params.opacity_reference))
    return ConeCue(probe.id, visible, apex, axis, opacity, probe.color)


def compute_tunnel(viewpoint: Viewpoint, probe: Probe) -> TunnelCue:
    """Truncated cone from the content display sphere to the probe sphere;
    its visibility is the probe's activation flag."""
    if not probe.placed or probe.content is None:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    content_center = probe.content.world_center(viewpoint)
    ball = probe.ball
    d = ball.center - content_center
    length = float(np.linalg.norm(d))
    if length < 1e-12:
        raise DegenerateDirectionError("content center coincides with the probe center")
    direction = d / length
    content_radius = probe.content.scale * ball.radius
    start = content_center + content_radius * direction
    end = ball.center - ball.radius * direction
    return TunnelCue(probe.id, probe.active, start, end,
                     content_radius, ball.radius, probe.color)


def cue_set(viewpoint: Viewpoint, probes, params: CueParams) -> list[ConeCue | TunnelCue]:
    """One cone and one tunnel per placed probe, ordered by probe id.

    Degenerate geometry never raises here: a probe at the viewpoint yields an
    invisible cone, and a zero-length tunnel keeps visibility = activation.
    """
    cues: list[ConeCue | TunnelCue] = []
    for probe in sorted(probes, key=lambda p: id_key(p.id)):
        if not probe.placed:
            continue
        try:
            cues.append(compute_cone(viewpoint, probe, params))
        except DegenerateViewError:
            cues.append(ConeCue(probe.id, False, viewpoint.position.copy(),
                                viewpoint.view_direction(), 1.0, probe.color))
        try:
            cues.append(compute_tunnel(viewpoint, probe))
        except DegenerateDirectionError:
            center = probe.ball.center
            cues.append(TunnelCue(probe.id, probe.active, center.copy(), center.copy(),
                                  probe.content.scale * probe.ball.radius,
                                  probe.ball.radius, probe.color))
    return cues
