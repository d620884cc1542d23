"""Mutable undirected attributed graph with 3D node positions.

Node positions live in one contiguous float64 array so that whole-graph
operations (layout ticks, deformation steps, spatial queries) run at numpy
speed; ids map to array rows through a dict. Links are stored canonically as
(min-id, max-id) pairs so {a,b} and {b,a} are the same object.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from .errors import (
    BadGraphFileError,
    DuplicateIdError,
    DuplicateLinkError,
    InvalidAttributeError,
    NonFiniteCoordinateError,
    SelfLoopError,
    UnknownIdError,
    UnknownLinkError,
)

NodeId = str | int
AttrValue = str | int | float | bool
LinkPair = tuple[NodeId, NodeId]

_graph_counter = itertools.count(1)


def id_key(node_id: NodeId) -> tuple[str, str]:
    """Total order over node ids: lexicographic on the string form, with the
    type name as a tiebreaker so int 1 and str "1" stay distinct."""
    return (str(node_id), type(node_id).__name__)


def canonical_link(a: NodeId, b: NodeId) -> LinkPair:
    return (a, b) if id_key(a) <= id_key(b) else (b, a)


def _check_id(node_id) -> NodeId:
    if isinstance(node_id, bool) or not isinstance(node_id, (str, int)):
        raise InvalidAttributeError(f"node id must be a string or integer, got {node_id!r}")
    return node_id


def _check_attributes(attributes) -> dict[str, AttrValue]:
    if attributes is None:
        return {}
    if not isinstance(attributes, dict):
        raise InvalidAttributeError("attributes must be a mapping")
    out: dict[str, AttrValue] = {}
    for key, value in attributes.items():
        if not isinstance(key, str) or not key:
            raise InvalidAttributeError(f"attribute keys must be nonempty strings, got {key!r}")
        if not isinstance(value, (str, int, float, bool)):
            raise InvalidAttributeError(
                f"attribute {key!r} must be a scalar or string, got {type(value).__name__}"
            )
        out[key] = value
    return out


@dataclass(frozen=True)
class Node:
    """Point-in-time view of one node."""

    id: NodeId
    position: tuple[float, float, float]
    attributes: dict[str, AttrValue]


@dataclass(frozen=True)
class Subgraph:
    """A node subset plus links of the parent among those nodes.

    When ``induced`` is true the link set contains every parent link whose
    two endpoints are both in ``node_ids``.
    """

    parent_token: str
    node_ids: frozenset[NodeId]
    links: frozenset[LinkPair]
    induced: bool = True

    def __post_init__(self):
        for a, b in self.links:
            if a not in self.node_ids or b not in self.node_ids:
                raise ValueError(f"link {(a, b)} leaves the subgraph node set")


class Graph:
    """Undirected attributed graph; single-owner mutable value.

    ``version`` increases on every mutation (structure or positions) and is
    what spatial indexes use to detect staleness.
    """

    def __init__(self, directed: bool = False):
        if directed:
            raise BadGraphFileError("directed graphs are not supported")
        self.directed = False
        self.token = f"g{next(_graph_counter)}"
        self._ids: list[NodeId] = []
        self._row: dict[NodeId, int] = {}
        self._pos = np.zeros((0, 3), dtype=np.float64)
        self._attrs: dict[NodeId, dict[str, AttrValue]] = {}
        self._adj: dict[NodeId, set[NodeId]] = {}
        self._links: set[LinkPair] = set()
        self._version = 0

    # -- introspection -------------------------------------------------

    @property
    def version(self) -> int:
        return self._version

    @property
    def node_count(self) -> int:
        return len(self._ids)

    @property
    def link_count(self) -> int:
        return len(self._links)

    def node_ids(self) -> list[NodeId]:
        return list(self._ids)

    def has_node(self, node_id: NodeId) -> bool:
        return node_id in self._row

    def has_link(self, a: NodeId, b: NodeId) -> bool:
        return canonical_link(a, b) in self._links

    def links(self) -> set[LinkPair]:
        return set(self._links)

    def sorted_links(self) -> list[LinkPair]:
        return sorted(self._links, key=lambda l: (id_key(l[0]), id_key(l[1])))

    def node(self, node_id: NodeId) -> Node:
        row = self._require(node_id)
        x, y, z = self._pos[row]
        return Node(node_id, (float(x), float(y), float(z)), dict(self._attrs[node_id]))

    def nodes(self) -> Iterator[Node]:
        for node_id in self._ids:
            yield self.node(node_id)

    def position(self, node_id: NodeId) -> np.ndarray:
        return self._pos[self._require(node_id)].copy()

    def attributes(self, node_id: NodeId) -> dict[str, AttrValue]:
        self._require(node_id)
        return dict(self._attrs[node_id])

    def degree(self, node_id: NodeId) -> int:
        self._require(node_id)
        return len(self._adj[node_id])

    def neighbors(self, node_id: NodeId) -> set[NodeId]:
        self._require(node_id)
        return set(self._adj[node_id])

    def get_positions(self) -> tuple[list[NodeId], np.ndarray]:
        """Node ids in row order plus a copy of the (n, 3) position array."""
        return list(self._ids), self._pos[: len(self._ids)].copy()

    def row_of(self, node_id: NodeId) -> int:
        return self._require(node_id)

    def positions_view(self) -> np.ndarray:
        """Read-only view of the live position array; rows follow node_ids()."""
        view = self._pos[: len(self._ids)]
        view.flags.writeable = False
        return view

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        """Center of the axis-aligned bounding box and the max distance to it."""
        if not self._ids:
            return np.zeros(3), 0.0
        pos = self._pos[: len(self._ids)]
        center = 0.5 * (pos.min(axis=0) + pos.max(axis=0))
        radius = float(np.sqrt(((pos - center) ** 2).sum(axis=1).max()))
        return center, radius

    def _require(self, node_id: NodeId) -> int:
        row = self._row.get(node_id)
        if row is None:
            raise UnknownIdError(f"unknown node id {node_id!r}")
        return row

    # -- mutation ------------------------------------------------------

    def add_node(self, node_id: NodeId, position=(0.0, 0.0, 0.0), attributes=None) -> None:
        _check_id(node_id)
        if node_id in self._row:
            raise DuplicateIdError(f"node id {node_id!r} already present")
        pos = np.asarray(position, dtype=np.float64)
        if pos.shape != (3,):
            raise NonFiniteCoordinateError(f"position must be a 3-vector, got {position!r}")
        if not np.all(np.isfinite(pos)):
            raise NonFiniteCoordinateError(f"non-finite position for node {node_id!r}")
        attrs = _check_attributes(attributes)
        n = len(self._ids)
        if n == len(self._pos):
            grown = np.zeros((max(4, 2 * n), 3), dtype=np.float64)
            grown[:n] = self._pos[:n]
            self._pos = grown
        self._pos[n] = pos
        self._ids.append(node_id)
        self._row[node_id] = n
        self._attrs[node_id] = attrs
        self._adj[node_id] = set()
        self._version += 1

    def remove_node(self, node_id: NodeId) -> None:
        """Remove a node and every incident link."""
        row = self._require(node_id)
        for other in list(self._adj[node_id]):
            self._links.discard(canonical_link(node_id, other))
            self._adj[other].discard(node_id)
        last = len(self._ids) - 1
        if row != last:
            moved = self._ids[last]
            self._ids[row] = moved
            self._row[moved] = row
            self._pos[row] = self._pos[last]
        self._ids.pop()
        del self._row[node_id]
        del self._attrs[node_id]
        del self._adj[node_id]
        self._version += 1

    def add_link(self, a: NodeId, b: NodeId) -> None:
        self._require(a)
        self._require(b)
        if a == b:
            raise SelfLoopError(f"self-loop on {a!r}")
        pair = canonical_link(a, b)
        if pair in self._links:
            raise DuplicateLinkError(f"link {pair} already present")
        self._links.add(pair)
        self._adj[a].add(b)
        self._adj[b].add(a)
        self._version += 1

    def remove_link(self, a: NodeId, b: NodeId) -> None:
        self._require(a)
        self._require(b)
        pair = canonical_link(a, b)
        if pair not in self._links:
            raise UnknownLinkError(f"no link {pair}")
        self._links.remove(pair)
        self._adj[a].discard(b)
        self._adj[b].discard(a)
        self._version += 1

    def set_position(self, node_id: NodeId, position) -> None:
        row = self._require(node_id)
        pos = np.asarray(position, dtype=np.float64)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise NonFiniteCoordinateError(f"bad position for node {node_id!r}")
        self._pos[row] = pos
        self._version += 1

    def set_all_positions(self, positions: np.ndarray) -> None:
        """Replace every node position; rows follow node_ids() order."""
        n = len(self._ids)
        arr = np.asarray(positions, dtype=np.float64)
        if arr.shape != (n, 3):
            raise NonFiniteCoordinateError(f"expected ({n}, 3) positions, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteCoordinateError("non-finite position in bulk update")
        self._pos[:n] = arr
        self._version += 1

    # -- subgraphs -----------------------------------------------------

    def links_among(self, node_ids: Iterable[NodeId]) -> set[LinkPair]:
        """Every link with both endpoints in node_ids (each id must exist)."""
        members = set(node_ids)
        for node_id in members:
            self._require(node_id)
        found: set[LinkPair] = set()
        for node_id in members:
            for other in self._adj[node_id]:
                if other in members:
                    found.add(canonical_link(node_id, other))
        return found

    def induced_subgraph(self, node_ids: Iterable[NodeId]) -> Subgraph:
        members = frozenset(node_ids)
        links = frozenset(self.links_among(members))
        return Subgraph(self.token, members, links, induced=True)

    # -- consistency ---------------------------------------------------

    def check_integrity(self) -> None:
        """Assert referential integrity; raises on violation."""
        for a, b in self._links:
            if a not in self._row or b not in self._row:
                raise UnknownIdError(f"dangling link {(a, b)}")
            if a == b:
                raise SelfLoopError(f"self-loop {(a, b)} stored")
            if canonical_link(a, b) != (a, b):
                raise InvalidAttributeError(f"non-canonical link {(a, b)} stored")
        for node_id, others in self._adj.items():
            for other in others:
                if canonical_link(node_id, other) not in self._links:
                    raise UnknownLinkError(f"adjacency {node_id!r}-{other!r} has no link")

    def copy(self) -> "Graph":
        dup = Graph()
        dup._ids = list(self._ids)
        dup._row = dict(self._row)
        dup._pos = self._pos[: len(self._ids)].copy()
        dup._attrs = {k: dict(v) for k, v in self._attrs.items()}
        dup._adj = {k: set(v) for k, v in self._adj.items()}
        dup._links = set(self._links)
        dup._version = self._version
        return dup

    # -- serialization -------------------------------------------------

    def to_dict(self, include_positions: bool = True) -> dict[str, Any]:
        nodes = []
        for node_id in sorted(self._ids, key=id_key):
            doc: dict[str, Any] = {"id": node_id}
            if include_positions:
                x, y, z = self._pos[self._row[node_id]]
                doc["pos"] = [float(x), float(y), float(z)]
            if self._attrs[node_id]:
                doc["attrs"] = dict(self._attrs[node_id])
            nodes.append(doc)
        links = [{"source": a, "target": b} for a, b in self.sorted_links()]
        return {"directed": False, "nodes": nodes, "links": links}

    @classmethod
    def from_dict(cls, data: dict[str, Any], strict: bool = False) -> "Graph":
        if not isinstance(data, dict):
            raise BadGraphFileError("graph document must be a JSON object")
        unknown = set(data) - {"directed", "nodes", "links"}
        if strict and unknown:
            raise BadGraphFileError(f"unknown graph fields: {sorted(unknown)}")
        if data.get("directed", False):
            raise BadGraphFileError("directed graphs are not supported")
        graph = cls()
        try:
            for node in data.get("nodes", []):
                extra = set(node) - {"id", "pos", "attrs"}
                if strict and extra:
                    raise BadGraphFileError(f"unknown node fields: {sorted(extra)}")
                graph.add_node(node["id"], node.get("pos", (0.0, 0.0, 0.0)), node.get("attrs"))
            for link in data.get("links", []):
                extra = set(link) - {"source", "target"}
                if strict and extra:
                    raise BadGraphFileError(f"unknown link fields: {sorted(extra)}")
                graph.add_link(link["source"], link["target"])
        except (KeyError, TypeError) as exc:
            raise BadGraphFileError(f"malformed graph document: {exc}") from exc
        return graph

    @classmethod
    def load(cls, path, strict: bool = False) -> "Graph":
        try:
            text = Path(path).read_text(encoding="utf-8")
            data = json.loads(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise BadGraphFileError(f"cannot read graph file {path}: {exc}") from exc
        return cls.from_dict(data, strict=strict)

    def save(self, path, include_positions: bool = True) -> None:
        doc = self.to_dict(include_positions=include_positions)
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
