"""Closed-ball containment queries over node positions via a uniform grid.

The grid is an accelerator only: results are defined to equal a linear scan,
with closed-ball semantics (distance exactly r is inside, no epsilon).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeParameterError, NonPositiveRadiusError, StaleIndexError
from .geometry import finite_vec3, vec3
from .graph import Graph, NodeId

GRID_DIVISIONS = 32


@dataclass(frozen=True)
class Ball:
    """Closed ball: contains p iff ||p - center|| <= radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", finite_vec3(self.center))
        r = float(self.radius)
        if not math.isfinite(r) or r <= 0.0:
            raise NonPositiveRadiusError(f"ball radius must be > 0, got {self.radius!r}")
        object.__setattr__(self, "radius", r)

    def contains(self, point) -> bool:
        return float(np.linalg.norm(vec3(point) - self.center)) <= self.radius


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", finite_vec3(self.origin))
        d = finite_vec3(self.direction)
        if abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
            raise ValueError("ray direction must be a unit vector (within 1e-9)")
        object.__setattr__(self, "direction", d)

    @classmethod
    def pointing(cls, origin, direction) -> "Ray":
        """Build a ray from any nonzero direction vector."""
        d = finite_vec3(direction)
        n = float(np.linalg.norm(d))
        if n == 0.0:
            raise ValueError("ray direction must be nonzero")
        return cls(finite_vec3(origin), d / n)


def point_on_ray(ray: Ray, t: float) -> np.ndarray:
    if t < 0.0:
        raise NegativeParameterError(f"ray parameter must be >= 0, got {t}")
    return ray.origin + t * ray.direction


class SpatialIndex:
    """Uniform grid over a snapshot of the graph's node positions.

    Cell edge defaults to max(bbox extent / 32, typical_radius). The index
    remembers the graph version it was built from; queries rebuild lazily
    when stale (or raise StaleIndexError in strict mode).
    """

    def __init__(self, graph: Graph, cell_size: float | None = None,
                 typical_radius: float | None = None):
        self._graph = graph
        self._cell_override = cell_size
        self._typical_radius = typical_radius
        self.rebuild()

    @property
    def stale(self) -> bool:
        return self._built_version != self._graph.version

    def rebuild(self) -> None:
        graph = self._graph
        self._ids, self._positions = graph.get_positions()
        n = len(self._ids)
        if self._cell_override is not None:
            cell = float(self._cell_override)
        else:
            extent = 0.0
            if n:
                spread = self._positions.max(axis=0) - self._positions.min(axis=0)
                extent = float(spread.max())
            cell = max(extent / GRID_DIVISIONS, self._typical_radius or 0.0, 1e-9)
        self._cell = cell
        self._cells: dict[tuple[int, int, int], list[int]] = {}
        if n:
            coords = np.floor(self._positions / cell).astype(np.int64)
            for row in range(n):
                key = (int(coords[row, 0]), int(coords[row, 1]), int(coords[row, 2]))
                self._cells.setdefault(key, []).append(row)
            self._lo = coords.min(axis=0)
            self._hi = coords.max(axis=0)
        else:
            self._lo = np.zeros(3, dtype=np.int64)
            self._hi = -np.ones(3, dtype=np.int64)
        self._built_version = graph.version

    def nodes_in_ball(self, ball: Ball, strict: bool = False,
                      refresh: bool = True) -> set[NodeId]:
        """Ids of all nodes whose positions lie inside the closed ball."""
        if self.stale:
            if strict:
                raise StaleIndexError("positions changed since the index was built")
            if refresh:
                self.rebuild()
        if not self._ids:
            return set()
        lo = np.maximum(np.floor((ball.center - ball.radius) / self._cell).astype(np.int64), self._lo)
        hi = np.minimum(np.floor((ball.center + ball.radius) / self._cell).astype(np.int64), self._hi)
        rows: list[int] = []
        for i in range(int(lo[0]), int(hi[0]) + 1):
            for j in range(int(lo[1]), int(hi[1]) + 1):
                for k in range(int(lo[2]), int(hi[2]) + 1):
                    bucket = self._cells.get((i, j, k))
                    if bucket:
                        rows.extend(bucket)
        if not rows:
            return set()
        candidates = np.asarray(rows, dtype=np.int64)
        delta = self._positions[candidates] - ball.center
        inside = np.sqrt((delta * delta).sum(axis=1)) <= ball.radius
        return {self._ids[row] for row in candidates[inside]}


def nodes_in_ball(index: SpatialIndex, ball: Ball, strict: bool = False) -> set[NodeId]:
    return index.nodes_in_ball(ball, strict=strict)
