"""Node placement, unit-disk adjacency and connectivity queries on a snapshot."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from nwbsim.config import Scenario

_CONNECTIVITY_ATTEMPTS = 1000


class Position(NamedTuple):
    x: float
    y: float


@dataclass
class TopologySnapshot:
    positions: dict[int, Position]
    adjacency: dict[int, list[int]]  # sorted neighbor ids, symmetric, no self-loops
    radio_range: float


def distance(a: Position, b: Position) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def in_range(a: Position, b: Position, radio_range: float) -> bool:
    # Boundary tie: distance exactly equal to the range counts as connected.
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy <= radio_range * radio_range


def build_snapshot(positions: dict[int, Position], radio_range: float) -> TopologySnapshot:
    nodes = sorted(positions)
    adjacency: dict[int, list[int]] = {n: [] for n in nodes}
    for i, a in enumerate(nodes):
        for b in nodes[i + 1 :]:
            if in_range(positions[a], positions[b], radio_range):
                adjacency[a].append(b)
                adjacency[b].append(a)
    for n in nodes:
        adjacency[n].sort()
    return TopologySnapshot(positions=positions, adjacency=adjacency, radio_range=radio_range)


def place_nodes(scenario: Scenario, rng: np.random.Generator) -> TopologySnapshot:
    """Draw node positions uniformly i.i.d. over the area.

    With require_connected the placement is redrawn until the unit-disk graph
    is connected (bounded retries so a hopeless scenario fails loudly).
    """
    for _ in range(_CONNECTIVITY_ATTEMPTS):
        raw = rng.random((scenario.node_count, 2))
        positions = {
            i: Position(raw[i, 0] * scenario.area_width, raw[i, 1] * scenario.area_height)
            for i in range(scenario.node_count)
        }
        topo = build_snapshot(positions, scenario.radio_range)
        if not scenario.require_connected or is_connected(topo):
            return topo
    raise RuntimeError(
        f"no connected placement found in {_CONNECTIVITY_ATTEMPTS} attempts "
        f"(node_count={scenario.node_count}, range={scenario.radio_range})"
    )


def k_hop_neighbors(topo: TopologySnapshot, node: int, k: int) -> set[int]:
    """Nodes at graph distance <= k from node, excluding node itself."""
    if node not in topo.adjacency:
        raise KeyError(f"unknown node {node}")
    if k < 1:
        raise ValueError("k must be >= 1")
    seen = {node}
    frontier = [node]
    result: set[int] = set()
    for _ in range(k):
        nxt = []
        for u in frontier:
            for v in topo.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    result.add(v)
                    nxt.append(v)
        frontier = nxt
    return result


def is_connected(topo: TopologySnapshot) -> bool:
    if not topo.positions:
        raise ValueError("empty topology")
    nodes = topo.positions.keys()
    start = next(iter(nodes))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in topo.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(topo.positions)
