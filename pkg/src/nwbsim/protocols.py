"""The five broadcast forwarding policies behind one decision interface.

Each policy sees receptions (and its own origination) and answers with a
Decision: transmit after a delay, arm or cancel a random-assessment timer,
or stay silent. The simulation driver owns the event queue and per-node
state; policies stay free of scheduling details so they can be tested on
hand-built tables and packets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nwbsim.mobility import NeighborTable
from nwbsim.radio import keyed_uniform
from nwbsim.topology import Position

# Decision kinds.
NO_TX = "no_tx"
TX = "tx"  # commit to a transmission after `delay`
ASSESS = "assess"  # arm (or keep) a cancellable assessment timer
CANCEL = "cancel"  # cancel a pending assessment timer


@dataclass(slots=True)
class Decision:
    kind: str
    delay: float = 0.0
    forwarder_set: frozenset | None = None


_SILENT = Decision(NO_TX)


@dataclass(slots=True)
class NwbPacket:
    nwb: tuple[int, int]  # (origin, sequence number), stable across rebroadcasts
    sender: int
    hop_count: int
    sender_position: Position | None = None  # carried by LBA packets only
    forwarder_set: frozenset | None = None  # carried by AHBP/DCB packets only


@dataclass(slots=True)
class ProtocolState:
    """Per-node, per-NWB bookkeeping."""

    received: bool = False
    first_rx_time: float | None = None
    rx_hop: int = 0
    heard_count: int = 0  # receptions from other nodes (never own transmissions)
    heard_at_tx: int = 0  # heard_count snapshot taken at the base transmission
    heard_senders: list = field(default_factory=list)  # (sender, position) for LBA
    covered: set = field(default_factory=set)  # SBA: nodes believed covered
    assess_timer: object = None
    transmit_scheduled: bool = False
    transmitted: bool = False
    tx_forwarders: frozenset | None = None
    tx_position: Position | None = None
    sr_timer: object = None
    sr_scheduled: bool = False
    sr_done: bool = False

    @property
    def committed(self) -> bool:
        return self.transmitted or self.transmit_scheduled


class DelaySource:
    """Per-event randomness keyed by (node, nwb) identity.

    Keying (rather than consuming a shared sequential stream) means two runs
    that differ only in an added transmission draw identical delays everywhere
    else, so paired comparisons (with/without SR, across drop levels) are not
    contaminated by stream-offset noise.
    """

    _TAG_JITTER = 1
    _TAG_RAD = 2
    _TAG_MC = 3

    def __init__(self, key_material: int, jitter_max: float, rad_max: float):
        self._base = key_material
        self.jitter_max = jitter_max
        self.rad_max = rad_max

    def jitter(self, node: int, idx: int) -> float:
        return keyed_uniform(self._base, self._TAG_JITTER, node, idx) * self.jitter_max

    def rad(self, node: int, idx: int) -> float:
        return keyed_uniform(self._base, self._TAG_RAD, node, idx) * self.rad_max

    def mc_rng(self, node: int, idx: int) -> np.random.Generator:
        seed = int(keyed_uniform(self._base, self._TAG_MC, node, idx) * 2**63)
        return np.random.Generator(np.random.PCG64(seed))


def uncovered_disk_fraction(
    center: Position,
    radius: float,
    heard_positions,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of the fraction of the disk around `center` not
    covered by the union of same-radius disks at `heard_positions`."""
    if not heard_positions:
        return 1.0
    draws = rng.random((samples, 2))
    r = radius * np.sqrt(draws[:, 0])
    ang = 2.0 * np.pi * draws[:, 1]
    px = center[0] + r * np.cos(ang)
    py = center[1] + r * np.sin(ang)
    covered = np.zeros(samples, dtype=bool)
    r2 = radius * radius
    for hx, hy in heard_positions:
        covered |= (px - hx) ** 2 + (py - hy) ** 2 <= r2
        if covered.all():
            return 0.0
    return float(1.0 - covered.mean())


def greedy_two_hop_cover(self_id: int, table: NeighborTable, already_covered: set[int]) -> set[int]:
    """Pick 1-hop neighbors until every known strict 2-hop neighbor outside
    already_covered is adjacent to a pick. Greedy max-gain, ties to lowest id."""
    one_hop = table.known_one_hop()
    targets: set[int] = set()
    for b in one_hop:
        targets |= table.neighbors_of(b)
    targets -= one_hop
    targets.discard(self_id)
    targets -= already_covered
    chosen: set[int] = set()
    candidates = sorted(one_hop)
    while targets:
        best = None
        best_gain = 0
        for c in candidates:
            if c in chosen:
                continue
            gain = len(targets & table.neighbors_of(c))
            if gain > best_gain:
                best, best_gain = c, gain
        if best is None:
            break  # remaining targets unreachable from this table
        chosen.add(best)
        targets -= table.neighbors_of(best)
    return chosen


def double_coverage_forwarders(self_id: int, table: NeighborTable, already_covered: set[int]) -> set[int]:
    """Two-hop cover extended so every known 1-hop neighbor is in range of at
    least two transmitters among {self} + forwarders, where a second coverer
    exists; single coverage is accepted for degenerate neighborhoods."""
    forwarders = greedy_two_hop_cover(self_id, table, already_covered)
    one_hop = table.known_one_hop()

    def coverers(w: int, chosen: set[int]) -> int:
        # Own transmission always reaches a 1-hop neighbor; a forwarder covers
        # w when w is recorded among its neighbors (a node does not cover itself).
        return 1 + sum(1 for f in chosen if f != w and w in table.neighbors_of(f))

    under = {w for w in one_hop if coverers(w, forwarders) < 2}
    candidates = sorted(one_hop - forwarders)
    while under:
        best = None
        best_gain = 0
        for c in candidates:
            if c in forwarders:
                continue
            gain = sum(1 for w in under if w != c and w in table.neighbors_of(c))
            if gain > best_gain:
                best, best_gain = c, gain
        if best is None:
            break  # leftovers have no second coverer; accepted degenerate
        forwarders.add(best)
        under = {w for w in under if coverers(w, forwarders) < 2}
    return forwarders


class BasePolicy:
    name = "base"
    needs_tables = False
    uses_positions = False

    def __init__(self, scenario, delays: DelaySource):
        self.scenario = scenario
        self.delays = delays

    def on_originate(self, node: int, table: NeighborTable | None) -> frozenset | None:
        """Header forwarder set for the origin's immediate transmission."""
        return None

    def on_receive(self, node: int, st: ProtocolState, pkt: NwbPacket, table: NeighborTable | None, first: bool) -> Decision:
        raise NotImplementedError

    def on_assess(self, node: int, idx: int, st: ProtocolState, position: Position) -> Decision:
        raise NotImplementedError


class FloodingPolicy(BasePolicy):
    """Every first-time receiver rebroadcasts once."""

    name = "flooding"

    def on_receive(self, node, st, pkt, table, first):
        if first:
            return Decision(TX, self.delays.jitter(node, pkt.nwb[1]))
        return _SILENT


class LbaPolicy(BasePolicy):
    """Rebroadcast only if the estimated additional coverage area is worth it.

    The first reception arms an assessment timer; senders overheard while
    waiting shrink the uncovered area. At expiry the node transmits iff the
    Monte Carlo estimate of its uncovered disk fraction exceeds the threshold.
    """

    name = "lba"
    uses_positions = True

    def on_receive(self, node, st, pkt, table, first):
        if first:
            return Decision(ASSESS, self.delays.rad(node, pkt.nwb[1]))
        return _SILENT

    def on_assess(self, node, idx, st, position):
        frac = uncovered_disk_fraction(
            position,
            self.scenario.radio_range,
            [p for _, p in st.heard_senders],
            self.scenario.lba_mc_samples,
            self.delays.mc_rng(node, idx),
        )
        if frac > self.scenario.lba_threshold_fraction:
            return Decision(TX, 0.0)
        return _SILENT


class SbaPolicy(BasePolicy):
    """Rebroadcast only while some own neighbor is not covered by heard
    transmissions, judged against the (possibly stale) 2-hop table."""

    name = "sba"
    needs_tables = True

    def on_receive(self, node, st, pkt, table, first):
        sender = pkt.sender
        st.covered.add(sender)
        st.covered |= table.neighbors_of(sender)  # unknown sender degenerates to {sender}
        if st.committed:
            return _SILENT
        known = table.known_one_hop()
        if known <= st.covered:
            return Decision(CANCEL)
        if st.assess_timer is None:
            return Decision(ASSESS, self._delay(node, pkt.nwb[1], table, known))
        return _SILENT  # keep the pending timer

    def _delay(self, node, idx, table, known):
        # Let well-connected nodes fire first: scale the random assessment
        # delay by (1 + max known neighbor degree) / (1 + own degree).
        dmax = max((len(table.neighbors_of(b)) for b in known), default=0)
        scale = (1 + dmax) / (1 + len(known))
        return min(self.scenario.rad_max, self.delays.rad(node, idx) * scale)

    def on_assess(self, node, idx, st, position):
        return Decision(TX, 0.0)


class AhbpPolicy(BasePolicy):
    """The upstream node designates which 1-hop neighbors relay, so that all
    its known 2-hop neighbors get covered."""

    name = "ahbp"
    needs_tables = True
    select = staticmethod(greedy_two_hop_cover)

    def on_originate(self, node, table):
        return frozenset(self.select(node, table, set()))

    def on_receive(self, node, st, pkt, table, first):
        if pkt.forwarder_set and node in pkt.forwarder_set and not st.committed:
            already = {pkt.sender} | table.neighbors_of(pkt.sender)
            forwarders = frozenset(self.select(node, table, already))
            return Decision(TX, self.delays.jitter(node, pkt.nwb[1]), forwarders)
        return _SILENT


class DcbPolicy(AhbpPolicy):
    """AHBP-style designation with built-in redundancy: every 1-hop neighbor
    covered twice where a second coverer exists."""

    name = "dcb"
    select = staticmethod(double_coverage_forwarders)


POLICIES = {
    "flooding": FloodingPolicy,
    "lba": LbaPolicy,
    "sba": SbaPolicy,
    "ahbp": AhbpPolicy,
    "dcb": DcbPolicy,
}
