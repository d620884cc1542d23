"""Deterministic 3D force-directed embedding.

One tick applies, in order: link springs (pulling linked pairs toward the
configured rest length, strength normalized by endpoint degree), charge-like
many-body repulsion approximated with a Barnes-Hut octree, velocity decay and
integration, centroid recentering, and finally the alpha cooling update
alpha <- alpha + (0 - alpha) * alpha_decay.

Determinism: all randomness flows from one splitmix64 stream seeded by the
caller; force accumulation uses fixed array order, so identical inputs give
bit-identical outputs within one build. The octree works in coordinates
relative to the point cloud's bounding-box corner, which keeps the tick
translation-equivariant apart from float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentStateError
from .graph import Graph, NodeId

_M64 = (1 << 64) - 1

# Repulsion softening added to squared distances; removes the r -> 0 pole.
SOFTENING = 1e-3
# Nodes sharing an exact position get a deterministic sub-micro jiggle.
JIGGLE = 1e-6
# Radius of the seeding sphere is SEED_RADIUS_FACTOR * n^(1/3).
SEED_RADIUS_FACTOR = 10.0
# Per-tick speed cap, in multiples of link_distance; guards against blowups.
SPEED_LIMIT_FACTOR = 100.0

_LEAF_CAPACITY = 16
_MAX_DEPTH = 48


class SplitMix64:
    """splitmix64 PRNG; the three mixing constants are the standard ones."""

    GAMMA = 0x9E3779B97F4A7C15
    MIX1 = 0xBF58476D1CE4E5B9
    MIX2 = 0x94D049BB133111EB

    def __init__(self, seed: int):
        self._state = int(seed) & _M64

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + self.GAMMA) & _M64
        z = self._state
        z = ((z ^ (z >> 30)) * self.MIX1) & _M64
        z = ((z ^ (z >> 27)) * self.MIX2) & _M64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1)."""
        return self.next_u64() / 2.0**64

    def next_symmetric(self) -> float:
        """Uniform in [-1, 1)."""
        return 2.0 * self.next_float() - 1.0


@dataclass(frozen=True)
class LayoutParams:
    seed: int = 0
    link_distance: float = 30.0
    link_strength: float | None = None  # None: 1 / min(degree) per link
    many_body_strength: float = -30.0
    theta: float = 0.9
    alpha_start: float = 1.0
    alpha_min: float = 0.001
    alpha_decay: float = 1.0 - 0.001 ** (1.0 / 300.0)
    velocity_decay: float = 0.6  # fraction of velocity retained per tick
    center_strength: float = 1.0
    max_iterations: int = 300

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be in [0, 1] (0 disables approximation)")
        if not 0.0 < self.alpha_decay < 1.0:
            raise ValueError("alpha_decay must be in (0, 1)")
        if self.alpha_min <= 0.0:
            raise ValueError("alpha_min must be > 0")
        if self.link_distance <= 0.0:
            raise ValueError("link_distance must be > 0")


@dataclass
class LayoutState:
    ids: list[NodeId]
    positions: np.ndarray  # (n, 3)
    velocities: np.ndarray  # (n, 3)
    alpha: float
    rng: SplitMix64
    _link_cache_version: int = -1
    _link_cache: tuple | None = None

    def copy(self) -> "LayoutState":
        dup = SplitMix64(0)
        dup._state = self.rng.state
        return LayoutState(list(self.ids), self.positions.copy(),
                           self.velocities.copy(), self.alpha, dup)


def seed_positions(graph: Graph, seed: int) -> LayoutState:
    """Deterministic start state: positions uniform in a sphere of radius
    SEED_RADIUS_FACTOR * n^(1/3), zero velocities, alpha = 1."""
    rng = SplitMix64(seed)
    ids = graph.node_ids()
    n = len(ids)
    radius = SEED_RADIUS_FACTOR * n ** (1.0 / 3.0)
    positions = np.zeros((n, 3), dtype=np.float64)
    for i in range(n):
        while True:
            x = rng.next_symmetric()
            y = rng.next_symmetric()
            z = rng.next_symmetric()
            if x * x + y * y + z * z <= 1.0:
                break
        positions[i] = (radius * x, radius * y, radius * z)
    return LayoutState(ids, positions, np.zeros((n, 3)), 1.0, rng)


# -- many-body repulsion (Barnes-Hut) ----------------------------------

_OCTANT_OFFSETS = np.array(
    [[x, y, z] for z in (0, 1) for y in (0, 1) for x in (0, 1)], dtype=np.float64
)


class _Cell:
    __slots__ = ("com", "count", "width", "rows", "children")

    def __init__(self, com, count, width, rows=None, children=None):
        self.com = com
        self.count = count
        self.width = width
        self.rows = rows  # leaf member rows, or None for internal cells
        self.children = children


def _build_octree(rel: np.ndarray) -> _Cell:
    n = len(rel)
    extent = float((rel.max(axis=0) - rel.min(axis=0)).max()) if n else 0.0
    size = extent if extent > 0.0 else 1.0

    def build(rows: np.ndarray, origin: np.ndarray, width: float, depth: int) -> _Cell:
        pts = rel[rows]
        com = pts.mean(axis=0)
        if rows.size <= _LEAF_CAPACITY or depth >= _MAX_DEPTH:
            return _Cell(com, rows.size, width, rows=rows)
        half = 0.5 * width
        center = origin + half
        octant = (
            (pts[:, 0] >= center[0]).astype(np.int64)
            + 2 * (pts[:, 1] >= center[1]).astype(np.int64)
            + 4 * (pts[:, 2] >= center[2]).astype(np.int64)
        )
        children = []
        for o in range(8):
            sub = rows[octant == o]
            if sub.size:
                children.append(build(sub, origin + _OCTANT_OFFSETS[o] * half, half, depth + 1))
        return _Cell(com, rows.size, width, children=children)

    return build(np.arange(n, dtype=np.int64), rel.min(axis=0) if n else np.zeros(3), size, 0)


def many_body_kicks(positions: np.ndarray, strength: float, alpha: float,
                    theta: float) -> np.ndarray:
    """Velocity increments from charge-like repulsion between all node pairs.

    A node at p receives, from a source at q with charge s,
    dv = (q - p) * s * alpha / (||q - p||^2 + SOFTENING); negative s repels.
    Cells pass the opening test when cell_width < theta * distance-to-center-
    of-mass and then act as one aggregate source; theta = 0 therefore forces
    descent to the leaves, where interactions are evaluated pairwise exactly.
    """
    n = len(positions)
    kicks = np.zeros((n, 3), dtype=np.float64)
    if n < 2:
        return kicks
    rel = positions - positions.min(axis=0)
    root = _build_octree(rel)
    stack: list[tuple[_Cell, np.ndarray]] = [(root, np.arange(n, dtype=np.int64))]
    while stack:
        cell, active = stack.pop()
        if cell.rows is not None:
            members = cell.rows
            delta = rel[members][None, :, :] - rel[active][:, None, :]
            d2 = (delta * delta).sum(axis=2) + SOFTENING
            w = strength * alpha / d2
            w[active[:, None] == members[None, :]] = 0.0
            kicks[active] += (delta * w[:, :, None]).sum(axis=1)
            continue
        delta = cell.com - rel[active]
        dist = np.sqrt((delta * delta).sum(axis=1))
        accept = cell.width < theta * dist
        taken = active[accept]
        if taken.size:
            d = delta[accept]
            d2 = (d * d).sum(axis=1) + SOFTENING
            kicks[taken] += d * (strength * cell.count * alpha / d2)[:, None]
        rest = active[~accept]
        if rest.size:
            for child in cell.children:
                stack.append((child, rest))
    return kicks


# -- tick --------------------------------------------------------------


def _link_arrays(state: LayoutState, graph: Graph, params: LayoutParams):
    """Per-link rows, strengths, and biases; cached against graph.version."""
    if state._link_cache_version == graph.version and state._link_cache is not None:
        return state._link_cache
    row = {node_id: i for i, node_id in enumerate(state.ids)}
    links = graph.sorted_links()
    m = len(links)
    src = np.zeros(m, dtype=np.int64)
    dst = np.zeros(m, dtype=np.int64)
    strength = np.zeros(m, dtype=np.float64)
    bias = np.zeros(m, dtype=np.float64)
    for i, (a, b) in enumerate(links):
        src[i] = row[a]
        dst[i] = row[b]
        da, db = graph.degree(a), graph.degree(b)
        strength[i] = params.link_strength if params.link_strength is not None \
            else 1.0 / min(da, db)
        bias[i] = da / (da + db)
    state._link_cache = (src, dst, strength, bias)
    state._link_cache_version = graph.version
    return state._link_cache


def _jiggle_coincident(state: LayoutState) -> None:
    seen: dict[tuple[float, float, float], int] = {}
    pos = state.positions
    for i in range(len(pos)):
        key = (pos[i, 0], pos[i, 1], pos[i, 2])
        if key in seen:
            for axis in range(3):
                pos[i, axis] += (state.rng.next_float() - 0.5) * JIGGLE
        else:
            seen[key] = i


def tick(state: LayoutState, graph: Graph, params: LayoutParams) -> LayoutState:
    """Advance the simulation one step in place; returns the same state."""
    if set(state.ids) != set(graph.node_ids()):
        raise InconsistentStateError("layout state does not match the graph's node set")
    n = len(state.ids)
    if n == 0:
        state.alpha += (0.0 - state.alpha) * params.alpha_decay
        return state
    _jiggle_coincident(state)
    pos, vel, alpha = state.positions, state.velocities, state.alpha

    src, dst, strength, bias = _link_arrays(state, graph, params)
    if len(src):
        delta = (pos[dst] + vel[dst]) - (pos[src] + vel[src])
        length = np.sqrt((delta * delta).sum(axis=1))
        safe = np.where(length < 1e-12, 1.0, length)
        factor = np.where(length < 1e-12, 0.0,
                          (length - params.link_distance) / safe * alpha * strength)
        corr = delta * factor[:, None]
        np.add.at(vel, dst, -corr * bias[:, None])
        np.add.at(vel, src, corr * (1.0 - bias)[:, None])

    if params.many_body_strength != 0.0:
        vel += many_body_kicks(pos, params.many_body_strength, alpha, params.theta)

    vel *= params.velocity_decay
    cap = SPEED_LIMIT_FACTOR * params.link_distance
    speed = np.sqrt((vel * vel).sum(axis=1))
    over = speed > cap
    if over.any():
        vel[over] *= (cap / speed[over])[:, None]
    pos += vel

    if params.center_strength != 0.0:
        pos += (np.zeros(3) - pos.mean(axis=0)) * params.center_strength

    state.alpha += (0.0 - state.alpha) * params.alpha_decay
    return state


def run_layout(graph: Graph, params: LayoutParams,
               from_current: bool = False) -> dict[NodeId, tuple[float, float, float]]:
    """Tick until alpha < alpha_min or max_iterations, then write the final
    positions into the graph and return them keyed by node id."""
    if from_current:
        ids, positions = graph.get_positions()
        state = LayoutState(ids, positions, np.zeros_like(positions),
                            params.alpha_start, SplitMix64(params.seed))
    else:
        state = seed_positions(graph, params.seed)
        state.alpha = params.alpha_start
    for _ in range(params.max_iterations):
        tick(state, graph, params)
        if state.alpha < params.alpha_min:
            break
    order = {node_id: i for i, node_id in enumerate(state.ids)}
    final = np.zeros_like(state.positions)
    for i, node_id in enumerate(graph.node_ids()):
        final[i] = state.positions[order[node_id]]
    graph.set_all_positions(final)
    return {node_id: (float(p[0]), float(p[1]), float(p[2]))
            for node_id, p in zip(graph.node_ids(), final)}
