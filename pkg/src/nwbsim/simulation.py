"""Single-run orchestration: one (scenario, seed) simulation end to end.

The driver owns the event queue, per-node protocol state, neighbor tables and
metric counters; policies and the SR wrapper only make decisions. NWBs are
originated nwb_spacing apart after a warm-up long enough for two hello rounds,
so neighbor tables are populated before the first broadcast and successive
NWBs do not interfere (checked, and flagged per NWB when violated).

Packet delivery consults live positions at transmit time (the true graph),
while protocols consult their possibly-stale tables; that gap is exactly the
vulnerability of table-driven protocols under mobility.
"""

from __future__ import annotations

from nwbsim import engine as ev
from nwbsim import metrics, selective_rebroadcast as sr
from nwbsim.config import PROPAGATION_DELAY, Scenario, validate_scenario
from nwbsim.engine import Engine, make_streams, stream_key
from nwbsim.mobility import MobilityModel, NeighborTable
from nwbsim.protocols import ASSESS, CANCEL, DelaySource, NO_TX, TX, NwbPacket, POLICIES, ProtocolState
from nwbsim.radio import Radio
from nwbsim.topology import TopologySnapshot, build_snapshot, is_connected, place_nodes

# One virtual-time slot after the last origination for stragglers, one more as
# a hard stop; an NWB still pending past that is flagged, not silently dropped.
_RUN_MARGIN_SPACINGS = 2


class ScenarioRun:
    def __init__(
        self,
        scenario: Scenario,
        n_nwbs: int | None = None,
        positions=None,
        trace: list | None = None,
        keep_transmit_log: bool = False,
        scenario_id: str = "",
    ):
        validate_scenario(scenario)
        self.scenario = scenario
        self.scenario_id = scenario_id or scenario.protocol
        self.streams = make_streams(scenario.seed)
        if positions is not None:
            self.topo: TopologySnapshot = build_snapshot(dict(positions), scenario.radio_range)
        else:
            self.topo = place_nodes(scenario, self.streams["placement"])
        self.nodes = sorted(self.topo.positions)
        n = len(self.nodes)

        # Origination plan: one NWB per node by default, in node order; an
        # explicit n_nwbs truncates or cycles that order.
        count = n if n_nwbs is None else n_nwbs
        self.origins = [self.nodes[i % n] for i in range(count)]
        self.n_nwbs = count

        mob = scenario.mobility
        self.warmup = 2.0 * mob.hello_period + 0.5
        spacing = scenario.nwb_spacing
        self.origin_times = [self.warmup + i * spacing for i in range(self.n_nwbs)]
        self.hello_stop = self.origin_times[-1] + spacing
        self.max_time = self.origin_times[-1] + _RUN_MARGIN_SPACINGS * spacing

        self.mobility = MobilityModel(
            scenario, self.topo.positions, self.streams["mobility"], self.max_time + 1.0
        )
        self.radio = Radio(scenario.loss, stream_key(scenario.seed, "loss"))
        delays = DelaySource(stream_key(scenario.seed, "protocol_delay"), scenario.jitter_max, scenario.rad_max)
        self.policy = POLICIES[scenario.protocol](scenario, delays)
        self._sr_key = stream_key(scenario.seed, "sr")
        self.hello_enabled = self.policy.needs_tables
        self.tables = {node: NeighborTable() for node in self.nodes} if self.hello_enabled else None
        self.expiry_window = mob.expiry_factor * mob.hello_period
        self.static = mob.kind == "static"

        self.states: dict[tuple[int, int], ProtocolState] = {}
        self.covered_count = [0] * self.n_nwbs
        self.tx_count = [0] * self.n_nwbs
        self.quiescent = [True] * self.n_nwbs
        self.connected_at_origin = [False] * self.n_nwbs
        self.hello_mark = [0] * self.n_nwbs
        self.hello_total = 0
        self._hello_index = dict.fromkeys(self.nodes, 0)
        self._outstanding: dict[int, int] = {}
        self.transmit_log: list | None = [] if keep_transmit_log else None
        self._static_connected = is_connected(self.topo) if n else False

        eng = Engine(trace=trace)
        eng.register(ev.NWB_ORIGINATE, self._on_originate)
        eng.register(ev.TRANSMIT_START, self._on_transmit)
        eng.register(ev.RECEIVE, self._on_receive)
        eng.register(ev.TIMER_FIRE, self._on_timer)
        eng.register(ev.HELLO_TICK, self._on_hello_tick)
        self.engine = eng
        self._finished = False

    # -- bookkeeping -------------------------------------------------------

    def _state(self, node: int, idx: int) -> ProtocolState:
        key = (node, idx)
        st = self.states.get(key)
        if st is None:
            st = self.states[key] = ProtocolState()
        return st

    def _nwb_sched(self, idx: int) -> None:
        self._outstanding[idx] = self._outstanding.get(idx, 0) + 1

    def _nwb_done(self, idx: int) -> None:
        left = self._outstanding[idx] - 1
        if left:
            self._outstanding[idx] = left
        else:
            del self._outstanding[idx]

    # -- event handlers ------------------------------------------------------

    def _on_originate(self, payload) -> None:
        origin, idx = payload
        # Anything from an earlier NWB still in flight means the spacing was
        # too small; flag those so aggregation can exclude them.
        for j in self._outstanding:
            if j < idx:
                self.quiescent[j] = False
        now = self.engine.now
        self.hello_mark[idx] = self.hello_total
        self.connected_at_origin[idx] = self._connected_now(now)
        st = self._state(origin, idx)
        st.received = True
        st.first_rx_time = now
        self.covered_count[idx] = 1
        table = self._table_for(origin, now)
        st.tx_forwarders = self.policy.on_originate(origin, table)
        st.transmit_scheduled = True
        self._nwb_sched(idx)
        self.engine.schedule(now, ev.TRANSMIT_START, (origin, idx, False))

    def _on_transmit(self, payload) -> None:
        node, idx, is_sr = payload
        self._nwb_done(idx)
        st = self._state(node, idx)
        now = self.engine.now
        if is_sr:
            st.sr_done = True
        else:
            st.transmitted = True
            st.heard_at_tx = st.heard_count  # counter SR window opens here
            if self.policy.uses_positions:
                st.tx_position = self.mobility.position_at(node, now)
        self.tx_count[idx] += 1
        origin = self.origins[idx]
        pkt = NwbPacket(
            nwb=(origin, idx),
            sender=node,
            hop_count=st.rx_hop + 1,
            sender_position=st.tx_position,
            forwarder_set=st.tx_forwarders,
        )
        if self.transmit_log is not None:
            self.transmit_log.append((now, node, idx, is_sr, st.tx_forwarders))
        tx_index = 1 if is_sr else 0
        deliver_at = now + PROPAGATION_DELAY
        delivered = self.radio.packet_delivered
        if self.static:
            for receiver in self.topo.adjacency[node]:
                if delivered(origin, idx, node, tx_index, receiver):
                    self._nwb_sched(idx)
                    self.engine.schedule(deliver_at, ev.RECEIVE, ("d", receiver, pkt))
        else:
            pos = self.mobility.positions_at(now)
            src = pos[node]
            r2 = self.scenario.radio_range ** 2
            for receiver in self.nodes:
                if receiver == node:
                    continue
                q = pos[receiver]
                if (q[0] - src[0]) ** 2 + (q[1] - src[1]) ** 2 <= r2 and delivered(
                    origin, idx, node, tx_index, receiver
                ):
                    self._nwb_sched(idx)
                    self.engine.schedule(deliver_at, ev.RECEIVE, ("d", receiver, pkt))
        if not is_sr:
            self._arm_sr(node, idx, st)

    def _on_receive(self, payload) -> None:
        if payload[0] == "h":
            _, receiver, sender, neighbor_list = payload
            self.tables[receiver].record_hello(sender, neighbor_list, self.engine.now)
            return
        _, receiver, pkt = payload
        idx = pkt.nwb[1]
        self._nwb_done(idx)
        st = self._state(receiver, idx)
        first = not st.received
        st.received = True
        st.heard_count += 1
        if self.policy.uses_positions:
            st.heard_senders.append((pkt.sender, pkt.sender_position))
        if first:
            st.first_rx_time = self.engine.now
            st.rx_hop = pkt.hop_count
            self.covered_count[idx] += 1
        if st.sr_timer is not None and sr.should_cancel_on_reception(self.scenario.sr, st):
            if self.engine.cancel(st.sr_timer):
                self._nwb_done(idx)
            st.sr_timer = None
        table = self._table_for(receiver, self.engine.now)
        decision = self.policy.on_receive(receiver, st, pkt, table, first)
        self._apply(receiver, idx, st, decision)

    def _on_timer(self, payload) -> None:
        tag, node, idx = payload
        self._nwb_done(idx)
        st = self._state(node, idx)
        if tag == "assess":
            st.assess_timer = None
            if st.committed:
                return
            decision = self.policy.on_assess(node, idx, st, self.mobility.position_at(node, self.engine.now))
            self._apply(node, idx, st, decision)
        else:  # "sr"
            st.sr_timer = None
            if sr.should_fire(self.scenario.sr, st):
                st.sr_scheduled = True
                self._nwb_sched(idx)
                self.engine.schedule(self.engine.now, ev.TRANSMIT_START, (node, idx, True))

    def _on_hello_tick(self, payload) -> None:
        node = payload
        now = self.engine.now
        table = self.tables[node]
        table.expire(now, self.expiry_window)
        neighbor_list = sorted(table.one_hop)
        self.hello_total += 1
        hello_index = self._hello_index[node]
        self._hello_index[node] = hello_index + 1
        deliver_at = now + PROPAGATION_DELAY
        hello_ok = self.radio.hello_delivered
        if self.static:
            for receiver in self.topo.adjacency[node]:
                if hello_ok(node, hello_index, receiver):
                    self.engine.schedule(deliver_at, ev.RECEIVE, ("h", receiver, node, neighbor_list))
        else:
            pos = self.mobility.positions_at(now)
            src = pos[node]
            r2 = self.scenario.radio_range ** 2
            for receiver in self.nodes:
                if receiver == node:
                    continue
                q = pos[receiver]
                if (q[0] - src[0]) ** 2 + (q[1] - src[1]) ** 2 <= r2 and hello_ok(node, hello_index, receiver):
                    self.engine.schedule(deliver_at, ev.RECEIVE, ("h", receiver, node, neighbor_list))
        nxt = now + self.scenario.mobility.hello_period
        if nxt <= self.hello_stop:
            self.engine.schedule(nxt, ev.HELLO_TICK, node)

    # -- decision plumbing --------------------------------------------------

    def _apply(self, node: int, idx: int, st: ProtocolState, decision) -> None:
        kind = decision.kind
        if kind == NO_TX:
            return
        now = self.engine.now
        if kind == TX:
            st.transmit_scheduled = True
            if decision.forwarder_set is not None:
                st.tx_forwarders = decision.forwarder_set
            self._nwb_sched(idx)
            self.engine.schedule(now + decision.delay, ev.TRANSMIT_START, (node, idx, False))
        elif kind == ASSESS:
            if st.assess_timer is None:
                self._nwb_sched(idx)
                st.assess_timer = self.engine.schedule_timer(
                    now + decision.delay, ev.TIMER_FIRE, ("assess", node, idx)
                )
        elif kind == CANCEL:
            if st.assess_timer is not None and self.engine.cancel(st.assess_timer):
                self._nwb_done(idx)
            st.assess_timer = None

    def _arm_sr(self, node: int, idx: int, st: ProtocolState) -> None:
        cfg = self.scenario.sr
        if cfg.mode == "none" or st.sr_scheduled or st.sr_done:
            return
        now = self.engine.now
        if cfg.mode == "probabilistic":
            if sr.wants_probabilistic_resend(cfg, self._sr_key, node, idx):
                st.sr_scheduled = True
                self._nwb_sched(idx)
                self.engine.schedule(now + cfg.timeout, ev.TRANSMIT_START, (node, idx, True))
        else:  # counter
            self._nwb_sched(idx)
            st.sr_timer = self.engine.schedule_timer(now + cfg.timeout, ev.TIMER_FIRE, ("sr", node, idx))

    # -- helpers -------------------------------------------------------------

    def _table_for(self, node: int, now: float) -> NeighborTable | None:
        if self.tables is None:
            return None
        return self.tables[node].expire(now, self.expiry_window)

    def _connected_now(self, now: float) -> bool:
        if self.static:
            return self._static_connected
        live = build_snapshot(self.mobility.positions_at(now), self.scenario.radio_range)
        return is_connected(live)

    # -- execution -----------------------------------------------------------

    def execute(self) -> list[metrics.RunRecord]:
        if self._finished:
            raise RuntimeError("a ScenarioRun can only execute once")
        self._finished = True
        for i, (origin, t) in enumerate(zip(self.origins, self.origin_times)):
            self.engine.schedule(t, ev.NWB_ORIGINATE, (origin, i))
        if self.hello_enabled:
            for node in self.nodes:
                self.engine.schedule(self.mobility.hello_phase[node], ev.HELLO_TICK, node)
        drained = self.engine.run_until_quiescent(self.max_time)
        if not drained:
            for idx in self._outstanding:
                self.quiescent[idx] = False
        return self._records()

    def _records(self) -> list[metrics.RunRecord]:
        s = self.scenario
        out = []
        for i in range(self.n_nwbs):
            if i + 1 < self.n_nwbs:
                hello_tx = self.hello_mark[i + 1] - (self.hello_mark[i] if i else 0)
            else:
                hello_tx = self.hello_total - (self.hello_mark[i] if i else 0)
            out.append(
                metrics.build_run_record(
                    scenario_id=self.scenario_id,
                    seed=s.seed,
                    protocol=s.protocol,
                    sr_mode=s.sr.mode,
                    sr_p=s.sr.p if s.sr.mode == "probabilistic" else None,
                    sr_n=s.sr.n if s.sr.mode == "counter" else None,
                    node_count=s.node_count,
                    drop_p=s.drop_probability,
                    speed_mps=s.mobility.mean_speed if s.mobility.kind == "random_waypoint" else 0.0,
                    nwb_index=i,
                    origin=self.origins[i],
                    connected=self.connected_at_origin[i],
                    covered=self.covered_count[i],
                    transmissions=self.tx_count[i],
                    hello_tx=hello_tx,
                    quiescent=self.quiescent[i],
                )
            )
        return out

    def covered_nodes(self, idx: int) -> set[int]:
        """Nodes that received (or originated) NWB idx; valid after execute()."""
        return {node for (node, i), st in self.states.items() if i == idx and st.received}


def run_scenario(
    scenario: Scenario,
    n_nwbs: int | None = None,
    scenario_id: str = "",
) -> list[metrics.RunRecord]:
    return ScenarioRun(scenario, n_nwbs=n_nwbs, scenario_id=scenario_id).execute()
