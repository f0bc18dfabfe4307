"""One optional extra rebroadcast per node per NWB, probabilistic or counter-based.

Only nodes that performed a base-protocol transmission (origination included)
take part; the resend reuses the original transmission's headers. Probabilistic
mode commits unconditionally at scheduling time. Counter mode arms a timer at
the node's own transmission and cancels it once n rebroadcasts from other
nodes have been overheard while the timer runs; receptions that preceded the
node's own transmission do not count. That window is what lets a relay whose
downstream forwarders stayed silent notice the silence and resend, which is
the recovery channel for statically designated forwarder sets.
"""

from __future__ import annotations

from nwbsim.config import SrConfig
from nwbsim.protocols import ProtocolState
from nwbsim.radio import keyed_uniform


def wants_probabilistic_resend(cfg: SrConfig, key_material: int, node: int, idx: int) -> bool:
    """Keyed Bernoulli(p) draw deciding the probabilistic extra rebroadcast."""
    return cfg.mode == "probabilistic" and keyed_uniform(key_material, node, idx) < cfg.p


def counter_satisfied(cfg: SrConfig, st: ProtocolState) -> bool:
    return st.heard_count - st.heard_at_tx >= cfg.n


def should_cancel_on_reception(cfg: SrConfig, st: ProtocolState) -> bool:
    return cfg.mode == "counter" and st.sr_timer is not None and counter_satisfied(cfg, st)


def should_fire(cfg: SrConfig, st: ProtocolState) -> bool:
    """Counter timer expiry: resend only if too few rebroadcasts were heard."""
    return not st.sr_done and not counter_satisfied(cfg, st)
