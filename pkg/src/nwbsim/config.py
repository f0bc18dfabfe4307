"""Configuration types shared by the simulator modules."""

from __future__ import annotations

from dataclasses import dataclass, field

PROTOCOLS = ("ahbp", "dcb", "flooding", "lba", "sba")
SR_MODES = ("none", "probabilistic", "counter")
LOSS_KINDS = ("perfect", "bernoulli")
MOBILITY_KINDS = ("static", "random_waypoint")

# Fixed per-hop propagation delay; negligible but nonzero to preserve causality.
PROPAGATION_DELAY = 1e-6


@dataclass
class LossModelConfig:
    kind: str = "bernoulli"
    drop_probability: float = 0.0
    drop_applies_to_hellos: bool = True


@dataclass
class MobilityConfig:
    kind: str = "static"
    mean_speed: float = 0.0
    pause_time: float = 0.0
    hello_period: float = 1.0
    expiry_factor: float = 2.5
    position_update_period: float = 1.0  # trace output only, not dynamics


@dataclass
class SrConfig:
    mode: str = "none"
    p: float = 0.5
    n: int = 2
    timeout: float = 0.100


@dataclass
class Scenario:
    """Full description of one simulation cell, before the seed loop."""

    node_count: int
    seed: int
    protocol: str = "flooding"
    area_width: float = 1000.0
    area_height: float = 1000.0
    radio_range: float = 250.0
    loss: LossModelConfig = field(default_factory=LossModelConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    sr: SrConfig = field(default_factory=SrConfig)
    jitter_max: float = 0.010
    rad_max: float = 0.050
    lba_threshold_fraction: float = 0.10
    lba_mc_samples: int = 2000
    nwb_spacing: float = 2.0
    require_connected: bool = False

    @property
    def drop_probability(self) -> float:
        return self.loss.drop_probability if self.loss.kind == "bernoulli" else 0.0


def validate_scenario(s: Scenario) -> None:
    """Raise ValueError naming the offending field if the scenario is invalid."""
    if s.node_count < 1:
        raise ValueError("node_count must be >= 1")
    if s.protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}, got {s.protocol!r}")
    if s.area_width <= 0 or s.area_height <= 0:
        raise ValueError("area_width and area_height must be > 0")
    if s.radio_range <= 0:
        raise ValueError("radio_range must be > 0")
    if s.loss.kind not in LOSS_KINDS:
        raise ValueError(f"loss.kind must be one of {LOSS_KINDS}, got {s.loss.kind!r}")
    if not 0.0 <= s.loss.drop_probability <= 1.0:
        raise ValueError("loss.drop_probability must be in [0, 1]")
    m = s.mobility
    if m.kind not in MOBILITY_KINDS:
        raise ValueError(f"mobility.kind must be one of {MOBILITY_KINDS}, got {m.kind!r}")
    if m.kind == "random_waypoint" and m.mean_speed <= 0:
        raise ValueError("mobility.mean_speed must be > 0 for random_waypoint")
    if m.mean_speed < 0:
        raise ValueError("mobility.mean_speed must be >= 0")
    if m.pause_time < 0:
        raise ValueError("mobility.pause_time must be >= 0")
    if m.hello_period <= 0:
        raise ValueError("mobility.hello_period must be > 0")
    if m.expiry_factor <= 1.0:
        raise ValueError("mobility.expiry_factor must be > 1 (expiry > hello_period)")
    sr = s.sr
    if sr.mode not in SR_MODES:
        raise ValueError(f"sr.mode must be one of {SR_MODES}, got {sr.mode!r}")
    if not 0.0 <= sr.p <= 1.0:
        raise ValueError("sr.p must be in [0, 1]")
    if sr.n < 1:
        raise ValueError("sr.n must be >= 1")
    if sr.mode != "none" and sr.timeout <= s.rad_max + s.jitter_max:
        raise ValueError("sr.timeout must exceed rad_max + jitter_max")
    if s.jitter_max <= 0:
        raise ValueError("jitter_max must be > 0")
    if s.rad_max <= 0:
        raise ValueError("protocol.rad_max must be > 0")
    if not 0.0 <= s.lba_threshold_fraction <= 1.0:
        raise ValueError("protocol.lba.threshold_fraction must be in [0, 1]")
    if s.lba_mc_samples < 1:
        raise ValueError("protocol.lba.mc_samples must be >= 1")
    if s.nwb_spacing <= 0:
        raise ValueError("nwb_spacing must be > 0")
