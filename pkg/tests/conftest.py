import random

import numpy as np
import pytest

from probekit.graph import Graph


def make_random_graph(n_nodes: int, n_links: int, seed: int = 0,
                      spread: float = 10.0) -> Graph:
    """Random graph with uniform positions in a cube of half-width spread."""
    rng = random.Random(seed)
    g = Graph()
    for i in range(n_nodes):
        pos = (rng.uniform(-spread, spread), rng.uniform(-spread, spread),
               rng.uniform(-spread, spread))
        g.add_node(f"n{i:03d}", pos)
    ids = g.node_ids()
    pairs = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]
    rng.shuffle(pairs)
    for a, b in pairs[:n_links]:
        g.add_link(a, b)
    return g


def make_triangle() -> Graph:
    g = Graph()
    g.add_node("A", (0.0, 0.0, 0.0))
    g.add_node("B", (1.0, 0.0, 0.0))
    g.add_node("C", (0.0, 1.0, 0.0))
    g.add_link("A", "B")
    g.add_link("B", "C")
    g.add_link("C", "A")
    return g


@pytest.fixture
def triangle() -> Graph:
    return make_triangle()
