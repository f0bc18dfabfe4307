"""Delivery decision per (transmission, receiver): range test plus loss model.

Losses are receiver-side Bernoulli drops. Each outcome is drawn from a
counter-keyed generator indexed by the packet identity, so a given
(packet, transmission, receiver) triple resolves the same way in every run
that shares the loss stream seed. That keeps the base protocol's delivery
pattern fixed when a variant (e.g. selective rebroadcast) merely adds
transmissions, which is what makes paired runs comparable.
"""

from __future__ import annotations

from nwbsim.config import LossModelConfig

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_TAG_PACKET = 1
_TAG_HELLO = 2


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def keyed_uniform(base: int, *parts: int) -> float:
    """Uniform in [0, 1) determined by the key material and the key parts."""
    h = base
    for p in parts:
        h = _mix((h + _GOLDEN + p) & _MASK)
    return h / 18446744073709551616.0  # 2**64


class Radio:
    """Loss model bound to one run's loss-stream key material."""

    def __init__(self, cfg: LossModelConfig, key_material: int):
        self.drop_p = cfg.drop_probability if cfg.kind == "bernoulli" else 0.0
        self.drop_hellos = cfg.drop_applies_to_hellos
        self._base = key_material & _MASK

    def packet_delivered(self, origin: int, nwb_seq: int, sender: int, tx_index: int, receiver: int) -> bool:
        """Delivery draw for an in-range broadcast data packet.

        tx_index distinguishes a node's base transmission (0) from its
        selective rebroadcast (1); each gets an independent draw.
        """
        if self.drop_p <= 0.0:
            return True
        u = keyed_uniform(self._base, _TAG_PACKET, origin, nwb_seq, sender, tx_index, receiver)
        return u >= self.drop_p

    def hello_delivered(self, sender: int, hello_index: int, receiver: int) -> bool:
        if not self.drop_hellos or self.drop_p <= 0.0:
            return True
        u = keyed_uniform(self._base, _TAG_HELLO, sender, hello_index, receiver)
        return u >= self.drop_p
