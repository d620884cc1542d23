"""Synthetic dataset generator and the bundled demo session script.

The generator reproduces the schema of the kind of multivariate graph the
tool targets (players linked when they share a club, numeric per-node stats)
with fully synthetic values; counts are exact. Everything is driven by a
seeded stdlib RNG so files regenerate identically.
"""

from __future__ import annotations

import math
import random
from typing import Any

from .graph import Graph
from .session import SessionCommand, SessionState, dump_script

_BASE_ATTRS = [
    "club", "appearances", "minutesPlayed", "passAccuracy", "goals", "assists",
    "shotsOnTarget", "tackles", "interceptions", "foulsCommitted", "yellowCards",
    "redCards", "distanceCovered", "touches", "duelsWon", "aerialsWon",
]

_CLUB_NAMES = [
    "athletic", "borussia", "crystal", "dynamo", "estrella", "fortuna",
    "galaxia", "hellas", "internacional", "juventus",
]


def attribute_names(count: int) -> list[str]:
    names = list(_BASE_ATTRS)
    i = 1
    while len(names) < count:
        names.append(f"stat{i:02d}")
        i += 1
    return names[:count]


def generate_graph(nodes: int = 95, links: int = 1046, attrs: int = 39,
                   seed: int = 0, positions: bool = False) -> Graph:
    """Random graph with exact counts: same-club pairs are linked first, then
    cross-club pairs fill up to the requested link count."""
    if nodes < 0 or links < 0 or attrs < 0:
        raise ValueError("counts must be non-negative")
    max_links = nodes * (nodes - 1) // 2
    if links > max_links:
        raise ValueError(f"{links} links impossible with {nodes} nodes (max {max_links})")
    rng = random.Random(seed)
    names = attribute_names(attrs)
    n_clubs = max(1, round(nodes / 12))
    clubs = [_CLUB_NAMES[i % len(_CLUB_NAMES)] + (f"-{i // len(_CLUB_NAMES)}" if i >= len(_CLUB_NAMES) else "")
             for i in range(n_clubs)]

    graph = Graph()
    club_of: dict[str, str] = {}
    for i in range(nodes):
        node_id = f"n{i + 1:03d}"
        club = clubs[i % n_clubs]
        club_of[node_id] = club
        attributes: dict[str, Any] = {}
        for name in names:
            if name == "club":
                attributes[name] = club
            elif name == "passAccuracy":
                attributes[name] = round(rng.uniform(55.0, 99.0), 1)
            elif name == "distanceCovered":
                attributes[name] = round(rng.uniform(80.0, 420.0), 1)
            else:
                attributes[name] = rng.randint(0, 4000 if name == "minutesPlayed" else 60)
        pos = ((rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10))
               if positions else (0.0, 0.0, 0.0))
        graph.add_node(node_id, pos, attributes)

    ids = graph.node_ids()
    same_club = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]
                 if club_of[a] == club_of[b]]
    cross_club = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]
                  if club_of[a] != club_of[b]]
    rng.shuffle(same_club)
    rng.shuffle(cross_club)
    for a, b in (same_club + cross_club)[:links]:
        graph.add_link(a, b)
    return graph


def generate_graph_doc(nodes: int = 95, links: int = 1046, attrs: int = 39,
                       seed: int = 0, positions: bool = False) -> dict:
    return generate_graph(nodes, links, attrs, seed, positions).to_dict(
        include_positions=positions)


# -- demo session -------------------------------------------------------------


def build_demo_script(seed: int = 7) -> list[SessionCommand]:
    """A session exercising every command kind, built constructively against a
    live state so every payload (member picks, probe targets) is valid.

    The graph is loaded with generator positions and the layout runs at the
    end, so replaying the script never depends on layout numerics for the
    edit payloads chosen here.
    """
    state = SessionState()
    script: list[SessionCommand] = []

    def do(kind: str, **payload) -> None:
        command = SessionCommand(state.applied_seq + 1, kind, payload)
        state.apply(command)
        script.append(command)

    graph_doc = generate_graph_doc(nodes=95, links=1046, attrs=39, seed=seed,
                                   positions=True)
    do("LoadGraph", graph=graph_doc)
    do("SetViewMode", mode="exocentric")

    # manual probe over a known node, adjusted along the controller ray
    target = state.graph.position("n001")
    origin = [float(target[0]), float(target[1]), float(target[2]) + 8.0]
    do("BeginProbe", ray={"origin": origin, "direction": [0.0, 0.0, -1.0]},
       t=4.0, radius=2.0)
    do("AdjustProbe", t=8.0, radius=3.0)
    do("PlaceProbe")
    do("SetProbeActive", probe="p1", active=True)

    # automatic probe on the busiest player
    do("PlaceProbe", auto={"attribute": "minutesPlayed", "objective": "max",
                           "radius": 3.0})
    do("SetProbeActive", probe="p2", active=True)
    do("MoveContentView", probe="p2", offset=[0.25, 0.0, 0.0])
    half = math.sqrt(0.5)
    do("RotateContentView", probe="p1", rotation=[half, 0.0, half, 0.0])

    # cross-view edit: link a member of each probe
    p1_members = [m for m in state.probes["p1"].members
                  if m not in state.probes["p2"].members]
    p2_members = [m for m in state.probes["p2"].members
                  if m not in state.probes["p1"].members]
    a, b = p1_members[0], p2_members[0]
    if state.graph.has_link(a, b):
        do("RemoveLink", source=a, target=b)
    do("SelectNode", node=a, source="p1")
    do("SelectNode", node=b, source="p2")
    do("CreateLink")

    # local edits
    do("CreateNode", id="manual1", position=[0.0, 12.0, 0.0],
       attributes={"club": "manual", "minutesPlayed": 1})
    do("SelectNode", node="manual1", source="global")
    do("SelectNode", node=a, source="p1")
    do("CreateLink")
    do("RemoveLink", source="manual1", target=a)
    do("RemoveNode", node="manual1")
    removable = [m for m in state.probes["p2"].members if m != b]
    if removable:
        do("RemoveNode", node=removable[0], source="p2")

    # a second of deformation input at 60 Hz
    for _ in range(60):
        do("DeformInput", u=0.6, dt=1.0 / 60.0)

    do("TeleportToProbe", probe="p2", standoff=6.0)
    do("RefreshContent", probe="p1")
    do("RefreshContent", probe="p2")
    do("SetProbeActive", probe="p1", active=False)
    do("RepositionProbe", probe="p1",
       ball={"center": [0.0, 0.0, 0.0], "radius": 4.0})
    do("SetViewpoint", position=[0.0, 0.0, 30.0], orientation=[1.0, 0.0, 0.0, 0.0])

    # the layout pass runs last so earlier payload choices stay valid
    do("RunLayout", seed=seed, iters=300)
    do("SetViewMode", mode="egocentric")
    return script


def demo_script_text(seed: int = 7) -> str:
    return dump_script(build_demo_script(seed))


if __name__ == "__main__":  # regenerate the bundled demo script
    import pathlib
    import sys

    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else \
        pathlib.Path(__file__).parent / "data" / "demo_session.jsonl"
    out.write_text(demo_script_text(), encoding="utf-8")
    print(f"wrote {out}")
