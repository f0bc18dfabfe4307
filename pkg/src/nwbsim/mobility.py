"""Node motion (static or random waypoint) and hello-driven neighbor tables."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from nwbsim.config import Scenario
from nwbsim.topology import Position


@dataclass
class NeighborTable:
    """Possibly-stale 1-hop and 2-hop knowledge built from overheard hellos."""

    one_hop: dict[int, float] = field(default_factory=dict)  # neighbor -> last_heard
    two_hop: dict[int, set[int]] = field(default_factory=dict)  # neighbor -> its 1-hop set

    def record_hello(self, sender: int, neighbor_list, now: float) -> None:
        self.one_hop[sender] = now
        self.two_hop[sender] = set(neighbor_list)

    def expire(self, now: float, window: float) -> "NeighborTable":
        """Drop 1-hop entries last heard before now - window, with their 2-hop sets."""
        cutoff = now - window
        stale = [n for n, t in self.one_hop.items() if t < cutoff]
        for n in stale:
            del self.one_hop[n]
            self.two_hop.pop(n, None)
        return self

    def known_one_hop(self) -> set[int]:
        return set(self.one_hop)

    def neighbors_of(self, node: int) -> set[int]:
        """The recorded 1-hop set of a neighbor; empty if we never heard it."""
        return self.two_hop.get(node, set())


class MobilityModel:
    """Closed-form positions over time plus per-node hello phases.

    Random-waypoint itineraries are drawn up front for the whole run horizon,
    node by node, so position queries never consume randomness. Speeds are
    uniform in [0.5, 1.5] x mean_speed; the lower bound stays away from zero
    to avoid the classic waypoint speed-decay pathology.
    """

    def __init__(
        self,
        scenario: Scenario,
        placement: dict[int, Position],
        rng: np.random.Generator,
        horizon: float,
    ):
        self._placement = placement
        self._static = scenario.mobility.kind == "static"
        nodes = sorted(placement)
        # Hello phases are drawn for every node regardless of protocol so the
        # mobility stream is consumed identically across protocol cells.
        self.hello_phase = {n: float(rng.random()) * scenario.mobility.hello_period for n in nodes}
        self._legs: dict[int, tuple[list[float], list[float], list[float]]] = {}
        if not self._static:
            cfg = scenario.mobility
            lo, hi = 0.5 * cfg.mean_speed, 1.5 * cfg.mean_speed
            for n in nodes:
                times = [0.0]
                xs = [placement[n].x]
                ys = [placement[n].y]
                t = 0.0
                while t < horizon:
                    wx = float(rng.random()) * scenario.area_width
                    wy = float(rng.random()) * scenario.area_height
                    speed = lo + float(rng.random()) * (hi - lo)
                    dist = ((wx - xs[-1]) ** 2 + (wy - ys[-1]) ** 2) ** 0.5
                    t += dist / speed
                    times.append(t)
                    xs.append(wx)
                    ys.append(wy)
                    if cfg.pause_time > 0:
                        t += cfg.pause_time
                        times.append(t)
                        xs.append(wx)
                        ys.append(wy)
                self._legs[n] = (times, xs, ys)

    def position_at(self, node: int, time: float) -> Position:
        if self._static:
            return self._placement[node]
        times, xs, ys = self._legs[node]
        i = bisect_right(times, time) - 1
        if i >= len(times) - 1:
            return Position(xs[-1], ys[-1])
        t0, t1 = times[i], times[i + 1]
        if t1 <= t0:
            return Position(xs[i], ys[i])
        f = (time - t0) / (t1 - t0)
        return Position(xs[i] + f * (xs[i + 1] - xs[i]), ys[i] + f * (ys[i + 1] - ys[i]))

    def positions_at(self, time: float) -> dict[int, Position]:
        if self._static:
            return self._placement
        return {n: self.position_at(n, time) for n in self._placement}
