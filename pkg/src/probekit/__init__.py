"""probekit: volumetric probes for exploring, editing, and deforming 3D
node-link diagrams — graph model, spatial queries, force layout, probe
lifecycle, deformation, guidance cues, and an event-sourced session engine
with a websocket service and CLI on top."""

from .canon import canonical_hash, canonical_json
from .cues import ConeCue, CueParams, TunnelCue, compute_cone, compute_tunnel, cue_set
from .deform import (
    DeformField,
    DeformInput,
    build_field,
    deform_step,
    displace_node,
    teleport_to_probe,
)
from .errors import ProbekitError
from .geometry import ViewMode, Viewpoint
from .graph import Graph, Node, NodeId, Subgraph
from .layout import LayoutParams, LayoutState, run_layout, seed_positions, tick
from .probes import (
    ContentView,
    Probe,
    adjust_probe,
    auto_place_probe,
    begin_probe,
    content_subgraph,
    haptic_active,
    place_probe,
    refresh_content,
    reposition_probe,
    set_probe_active,
)
from .session import (
    NodeRef,
    SessionCommand,
    SessionState,
    apply_changes,
    parse_script,
    replay,
)
from .spatial import Ball, Ray, SpatialIndex, nodes_in_ball, point_on_ray

__version__ = "0.1.0"

__all__ = [
    "Ball", "ConeCue", "ContentView", "CueParams", "DeformField", "DeformInput",
    "Graph", "LayoutParams", "LayoutState", "Node", "NodeId", "NodeRef", "Probe",
    "ProbekitError", "Ray", "SessionCommand", "SessionState", "SpatialIndex",
    "Subgraph", "TunnelCue", "ViewMode", "Viewpoint", "adjust_probe",
    "apply_changes", "auto_place_probe", "begin_probe", "build_field",
    "canonical_hash", "canonical_json", "compute_cone", "compute_tunnel",
    "content_subgraph", "cue_set", "deform_step", "displace_node",
    "haptic_active", "nodes_in_ball", "parse_script", "place_probe",
    "point_on_ray", "refresh_content", "replay", "reposition_probe", "run_layout",
    "seed_positions", "set_probe_active", "teleport_to_probe", "tick",
]
