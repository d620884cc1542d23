"""Probe-driven navigation and graph deformation.

Each active probe i contributes a unit direction v_i from its content view's
world center toward its ball center, scaled to v~_i = u * kappa * dt * v_i by
the controller input u in [-1, 1]. A node at p moves by the uniform average
of the v~_j over the probes containing it; a node outside every active probe
moves by the inverse-distance weighted average over all of them:

    p -> p + (sum_j w_j * v~_j) / (sum_j w_j)

with w_j = 1 over J = {j : ||p - b_j|| <= r_j} when J is nonempty, else
J = I and w_j = ||p - b_j||^-1. With a single active probe both branches
reduce to the same constant vector, a uniform translation of the graph.

The update is intentionally discontinuous at ball surfaces (it is defined
that way); all displacements in one step are evaluated against the pre-step
positions and ball centers, and active probe centers are themselves displaced
as points afterward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDirectionError,
    InvalidPayloadError,
    NegativeParameterError,
    NoActiveProbesError,
    NotPlacedError,
)
from .geometry import Viewpoint
from .graph import Graph, id_key
from .probes import Probe
from .spatial import Ball

DEFAULT_SPEED = 1.0  # world units per second at |u| = 1


@dataclass(frozen=True)
class DeformInput:
    u: float
    dt: float
    kappa: float = DEFAULT_SPEED

    def __post_init__(self):
        if not -1.0 <= self.u <= 1.0:
            raise InvalidPayloadError(f"controller input must be in [-1, 1], got {self.u}")
        if not self.dt > 0.0:
            raise InvalidPayloadError(f"frame duration must be > 0, got {self.dt}")
        if not self.kappa > 0.0:
            raise InvalidPayloadError(f"speed must be > 0, got {self.kappa}")


@dataclass(frozen=True)
class DeformField:
    """Active probe geometry plus unit and scaled direction vectors."""

    probe_ids: tuple[str, ...]
    centers: np.ndarray  # (k, 3) ball centers
    radii: np.ndarray  # (k,)
    directions: np.ndarray  # (k, 3) unit v_i
    scaled: np.ndarray  # (k, 3) v~_i


def build_field(probes, viewpoint: Viewpoint, deform_input: DeformInput) -> DeformField:
    """Directions for every active probe, in probe-id order."""
    active = sorted((p for p in probes if p.active and p.placed), key=lambda p: id_key(p.id))
    if not active:
        raise NoActiveProbesError("deformation needs at least one active probe")
    k = len(active)
    centers = np.zeros((k, 3))
    radii = np.zeros(k)
    directions = np.zeros((k, 3))
    for i, probe in enumerate(active):
        centers[i] = probe.ball.center
        radii[i] = probe.ball.radius
        content_center = probe.content.world_center(viewpoint)
        d = centers[i] - content_center
        length = float(np.linalg.norm(d))
        if length <= 1e-9:
            raise DegenerateDirectionError(
                f"probe {probe.id}: content center coincides with the ball center")
        directions[i] = d / length
    scale = deform_input.u * deform_input.kappa * deform_input.dt
    return DeformField(tuple(p.id for p in active), centers, radii,
                       directions, scale * directions)


def displace_batch(points: np.ndarray, field: DeformField) -> np.ndarray:
    """Apply the position update to an (m, 3) array of points.

    Distances are computed per probe (never as one (m, k, 3) tensor) and the
    weighted sums are matrix products, which keeps a 10k-node step within a
    frame budget.
    """
    pts = np.asarray(points, dtype=np.float64)
    m, k = len(pts), len(field.radii)
    dist = np.empty((m, k), dtype=np.float64)
    for j in range(k):
        delta = pts - field.centers[j]
        dist[:, j] = np.sqrt((delta * delta).sum(axis=1))
    inside = dist <= field.radii[None, :]
    count = inside.sum(axis=1)
    numer_in = inside.astype(np.float64) @ field.scaled
    with np.errstate(divide="ignore", invalid="ignore"):
        # dist can be 0 only for a point inside that probe (radii > 0), and
        # such a point takes the inside branch; the inf lane is discarded
        weights = 1.0 / dist
        numer_out = weights @ field.scaled
        denom_out = weights.sum(axis=1)
        disp = np.where((count > 0)[:, None],
                        numer_in / np.maximum(count, 1)[:, None],
                        numer_out / denom_out[:, None])
    return pts + disp


def displace_node(point, field: DeformField) -> np.ndarray:
    """Apply the position update to one point."""
    return displace_batch(np.asarray(point, dtype=np.float64)[None, :], field)[0]


def deform_step(graph: Graph, probes, viewpoint: Viewpoint,
                deform_input: DeformInput) -> DeformField:
    """Displace every node and every active probe center, all against the
    pre-step snapshot. Returns the field that was applied."""
    field = build_field(probes, viewpoint, deform_input)
    ids, positions = graph.get_positions()
    if len(ids):
        graph.set_all_positions(displace_batch(positions, field))
    new_centers = displace_batch(field.centers, field)
    by_id = {p.id: p for p in probes}
    for i, probe_id in enumerate(field.probe_ids):
        probe = by_id[probe_id]
        probe.ball = Ball(new_centers[i], probe.ball.radius)
    return field


def teleport_to_probe(viewpoint: Viewpoint, probe: Probe, standoff: float) -> Viewpoint:
    """Move the viewpoint to the probe center, backed off ``standoff`` units
    along the current view direction; orientation is unchanged."""
    if not probe.placed:
        raise NotPlacedError(f"probe {probe.id} is not placed")
    if standoff < 0.0:
        raise NegativeParameterError(f"standoff must be >= 0, got {standoff}")
    position = probe.ball.center - standoff * viewpoint.view_direction()
    return viewpoint.moved_to(position)
