"""Headless reporting: render a session state to a 3D figure plus CSV tables.

Writes into the output directory:
  scene.png   3D rendering of nodes, links, probe spheres, and tunnels
  nodes.csv   id, x, y, z, degree, probes (semicolon-joined containing probes)
  links.csv   source, target, probes
  probes.csv  id, center, radius, active, placed, member_count
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from mpl_toolkits.mplot3d.art3d import Line3DCollection

from .graph import id_key
from .session import SessionState


def _sphere_wires(center, radius, n=18):
    """Three great-circle wires approximating a sphere outline."""
    theta = np.linspace(0.0, 2.0 * np.pi, n)
    circles = []
    for axes in ((0, 1), (0, 2), (1, 2)):
        pts = np.tile(np.asarray(center, dtype=float), (n, 1))
        pts[:, axes[0]] += radius * np.cos(theta)
        pts[:, axes[1]] += radius * np.sin(theta)
        circles.append(pts)
    return circles


def render_scene(state: SessionState, path: Path, dpi: int = 150) -> None:
    fig = plt.figure(figsize=(9, 7))
    ax = fig.add_subplot(111, projection="3d")
    ids, positions = state.graph.get_positions()
    row = {node_id: i for i, node_id in enumerate(ids)}

    node_colors = {}
    for probe in state.placed_probes():
        for member in probe.members:
            node_colors.setdefault(member, probe.color)

    if len(ids):
        colors = [node_colors.get(node_id, (0.45, 0.45, 0.45)) for node_id in ids]
        sizes = [36.0 if node_id in node_colors else 14.0 for node_id in ids]
        ax.scatter(positions[:, 0], positions[:, 1], positions[:, 2],
                   c=colors, s=sizes, depthshade=True)
    links = state.graph.sorted_links()
    if links:
        segments = [(positions[row[a]], positions[row[b]]) for a, b in links]
        ax.add_collection3d(Line3DCollection(segments, colors=(0.6, 0.6, 0.6, 0.35),
                                             linewidths=0.7))
    from .cues import TunnelCue, cue_set

    for probe in state.placed_probes():
        for wire in _sphere_wires(probe.ball.center, probe.ball.radius):
            ax.plot(wire[:, 0], wire[:, 1], wire[:, 2],
                    color=probe.color, alpha=0.8, linewidth=1.2)
    for cue in cue_set(state.viewpoint, state.placed_probes(), state.cue_params):
        if isinstance(cue, TunnelCue) and cue.visible:
            seg = np.vstack([cue.start, cue.end])
            ax.plot(seg[:, 0], seg[:, 1], seg[:, 2], color=cue.color,
                    linestyle="--", linewidth=1.5, alpha=0.9)
    vp = state.viewpoint.position
    ax.scatter([vp[0]], [vp[1]], [vp[2]], marker="^", c="black", s=50)

    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_title(f"{state.graph.node_count} nodes / {state.graph.link_count} links / "
                 f"{len(state.probes)} probes (seq {state.applied_seq})")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def write_tables(state: SessionState, out_dir: Path) -> None:
    containing: dict = {}
    for probe in state.placed_probes():
        for member in probe.members:
            containing.setdefault(member, []).append(probe.id)

    with (out_dir / "nodes.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "z", "degree", "probes"])
        for node_id in sorted(state.graph.node_ids(), key=id_key):
            x, y, z = state.graph.position(node_id)
            writer.writerow([node_id, repr(float(x)), repr(float(y)), repr(float(z)),
                             state.graph.degree(node_id),
                             ";".join(containing.get(node_id, []))])

    with (out_dir / "links.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "probes"])
        for a, b in state.graph.sorted_links():
            shared = [p.id for p in state.placed_probes()
                      if a in p.members and b in p.members]
            writer.writerow([a, b, ";".join(shared)])

    with (out_dir / "probes.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "center_x", "center_y", "center_z", "radius",
                         "active", "placed", "member_count"])
        for probe in state.placed_probes():
            cx, cy, cz = probe.ball.center
            writer.writerow([probe.id, repr(float(cx)), repr(float(cy)), repr(float(cz)),
                             repr(float(probe.ball.radius)), probe.active, probe.placed,
                             len(probe.members)])


def write_report(state: SessionState, out_dir: str | Path, dpi: int = 150) -> list[Path]:
    """Render figure + tables; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    render_scene(state, out / "scene.png", dpi=dpi)
    write_tables(state, out)
    return [out / "scene.png", out / "nodes.csv", out / "links.csv", out / "probes.csv"]
