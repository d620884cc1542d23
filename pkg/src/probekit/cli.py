"""Command-line interface.

Subcommands: layout, replay, validate, serve, gen, report. Session scripts
are JSON-lines command logs; the literal script name "demo" resolves to the
bundled demo session. Usage errors exit 2, validation failures exit 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .canon import canonical_json
from .errors import ProbekitError
from .generate import generate_graph
from .graph import Graph
from .layout import LayoutParams, run_layout
from .session import SessionCommand, SessionState, parse_script
from .spatial import Ball, SpatialIndex


def _load_script(spec: str) -> list[SessionCommand]:
    if spec == "demo":
        from importlib import resources

        text = resources.files("probekit").joinpath("data/demo_session.jsonl") \
            .read_text(encoding="utf-8")
    else:
        text = Path(spec).read_text(encoding="utf-8")
    return parse_script(text)


def load_session_config(path: str | None):
    """Session config file: {"cue_params": {...}, "kappa": float}, both keys
    optional. Returns (CueParams | None, kappa | None)."""
    if path is None:
        return None, None
    from .cues import CueParams

    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        cue_params = CueParams.from_dict(doc["cue_params"]) if "cue_params" in doc else None
        kappa = float(doc["kappa"]) if "kappa" in doc else None
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad session config {path}: {exc}") from exc
    return cue_params, kappa


def _initial_state(graph_path: str | None, config_path: str | None = None) -> SessionState:
    cue_params, kappa = load_session_config(config_path)
    state = SessionState(cue_params=cue_params, kappa=kappa if kappa is not None else 1.0)
    if graph_path:
        graph = Graph.load(graph_path)
        state.graph = graph
    return state


# -- subcommands -------------------------------------------------------------


def cmd_layout(args) -> int:
    graph = Graph.load(args.graph)
    params = LayoutParams(seed=args.seed, max_iterations=args.iters)
    run_layout(graph, params)
    doc = graph.to_dict()
    text = json.dumps(doc, indent=2) + "\n"
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_replay(args) -> int:
    commands = _load_script(args.script)
    state = _initial_state(args.graph, args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    every = max(1, args.every)
    for command in commands:
        state.apply(command)
        if command.seq % every == 0:
            frame = out_dir / f"frame_{command.seq:06d}.json"
            frame.write_text(canonical_json(state.snapshot()) + "\n", encoding="utf-8")
    final = out_dir / "final.json"
    final.write_text(canonical_json(state.snapshot()) + "\n", encoding="utf-8")
    print(f"replayed {len(commands)} commands -> {out_dir} "
          f"(hash {state.state_hash()[:16]})")
    return 0


def _validate_state(state: SessionState) -> list[tuple[str, str | None]]:
    """Run the invariant suites; returns (name, failure-or-None) pairs."""
    import numpy as np

    from .probes import haptic_active

    results: list[tuple[str, str | None]] = []

    def check(name: str, fn) -> None:
        try:
            fn()
            results.append((name, None))
        except Exception as exc:  # report, don't abort the suite
            results.append((name, f"{type(exc).__name__}: {exc}"))

    check("graph referential integrity", state.graph.check_integrity)

    def members_resolve():
        for probe in state.placed_probes():
            missing = [m for m in probe.members if not state.graph.has_node(m)]
            if missing:
                raise AssertionError(f"probe {probe.id} members missing from graph: {missing}")

    check("probe memberships resolve", members_resolve)

    def content_fidelity():
        for probe in state.placed_probes():
            content = probe.content
            if content is None:
                continue
            shown = content.content_positions(state.viewpoint, probe.ball.center)
            for node_id, pos in shown.items():
                recovered = content.invert_position(state.viewpoint, probe.ball.center, pos)
                err = float(np.abs(recovered - content.captured_positions[node_id]).max())
                if err > 1e-9:
                    raise AssertionError(f"probe {probe.id} node {node_id}: {err}")

    check("content view similarity transform", content_fidelity)

    def haptic_law():
        expected = haptic_active(state.pending_probe, state.index)
        if state.haptic != expected:
            raise AssertionError(f"haptic flag {state.haptic}, expected {expected}")

    check("haptic biconditional", haptic_law)

    def ball_query_oracle():
        index = SpatialIndex(state.graph)
        for probe in state.placed_probes():
            got = index.nodes_in_ball(probe.ball)
            want = {node.id for node in state.graph.nodes()
                    if Ball(probe.ball.center, probe.ball.radius).contains(node.position)}
            if got != want:
                raise AssertionError(f"probe {probe.id}: grid {len(got)} vs scan {len(want)}")

    check("spatial index matches linear scan", ball_query_oracle)

    def snapshot_round_trip():
        snap = state.snapshot()
        restored = SessionState.restore(json.loads(json.dumps(snap)))
        if canonical_json(restored.snapshot()) != canonical_json(snap):
            raise AssertionError("restore(snapshot(s)) differs from s")

    check("snapshot round trip", snapshot_round_trip)
    return results


def cmd_validate(args) -> int:
    try:
        commands = _load_script(args.script)
    except (OSError, ProbekitError) as exc:
        print(f"FAIL  script unreadable: {exc}")
        return 1
    failures = 0

    state = _initial_state(args.graph, args.config)
    try:
        for command in commands:
            state.apply(command)
        print(f"ok    replayed {len(commands)} commands")
    except ProbekitError as exc:
        print(f"FAIL  replay: [{exc.code}] {exc}")
        return 1

    second = _initial_state(args.graph, args.config)
    for command in commands:
        second.apply(command)
    if second.state_hash() == state.state_hash():
        print(f"ok    replay determinism (hash {state.state_hash()[:16]})")
    else:
        print("FAIL  replay determinism: hashes differ")
        failures += 1

    for name, failure in _validate_state(state):
        if failure is None:
            print(f"ok    {name}")
        else:
            print(f"FAIL  {name}: {failure}")
            failures += 1
    return 1 if failures else 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, graph_path=args.graph, host=args.host,
          static_dir=args.static, log_path=args.log, config_path=args.config)
    return 0


def cmd_gen(args) -> int:
    graph = generate_graph(nodes=args.nodes, links=args.links, attrs=args.attrs,
                           seed=args.seed, positions=args.positions)
    text = json.dumps(graph.to_dict(include_positions=args.positions), indent=2) + "\n"
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    from .report import write_report

    if args.snapshot:
        state = SessionState.restore(json.loads(Path(args.snapshot).read_text(encoding="utf-8")))
    elif args.script:
        state = _initial_state(args.graph)
        for command in _load_script(args.script):
            state.apply(command)
    elif args.graph:
        state = _initial_state(args.graph)
    else:
        print("report needs --snapshot, --script, or --graph", file=sys.stderr)
        return 2
    written = write_report(state, args.out, dpi=args.dpi)
    for path in written:
        print(path)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probekit",
                                     description="probe-based 3D graph exploration toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="compute a force-directed 3D embedding")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_layout)

    p = sub.add_parser("replay", help="replay a session script into snapshot frames")
    p.add_argument("--script", required=True, help="session jsonl, or 'demo'")
    p.add_argument("--graph", default=None, help="optional initial graph file")
    p.add_argument("--config", default=None, help="session config JSON (cue_params, kappa)")
    p.add_argument("--out", required=True, help="frame output directory")
    p.add_argument("--every", type=int, default=1, help="snapshot every N commands")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("validate", help="replay a script and run the invariant suites")
    p.add_argument("--script", required=True, help="session jsonl, or 'demo'")
    p.add_argument("--graph", default=None)
    p.add_argument("--config", default=None, help="session config JSON (cue_params, kappa)")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("serve", help="run the websocket session service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--graph", default=None)
    p.add_argument("--static", default=None, help="static directory for the web client")
    p.add_argument("--log", default=None, help="append applied commands to this jsonl")
    p.add_argument("--config", default=None, help="session config JSON (cue_params, kappa)")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("gen", help="generate a synthetic attributed graph")
    p.add_argument("--nodes", type=int, default=95)
    p.add_argument("--links", type=int, default=1046)
    p.add_argument("--attrs", type=int, default=39)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--positions", action="store_true",
                   help="include generator positions instead of leaving pos to layout")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("report", help="render figures and CSV tables for a state")
    p.add_argument("--snapshot", default=None, help="canonical snapshot JSON")
    p.add_argument("--script", default=None, help="session jsonl to replay, or 'demo'")
    p.add_argument("--graph", default=None)
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--dpi", type=int, default=150)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    from .service import configure_logging

    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ProbekitError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
