"""Deterministic discrete-event core: event queue, virtual clock, named RNG streams."""

from __future__ import annotations

import heapq

import numpy as np

# Event kinds.
NWB_ORIGINATE = 0
TRANSMIT_START = 1
RECEIVE = 2
TIMER_FIRE = 3
HELLO_TICK = 4
MOBILITY_UPDATE = 5

KIND_NAMES = (
    "NwbOriginate",
    "TransmitStart",
    "Receive",
    "TimerFire",
    "HelloTick",
    "MobilityUpdate",
)

# Named streams derived from the scenario seed. Keeping them separate means
# e.g. changing the drop probability does not perturb placement or mobility,
# so paired comparisons across protocols run on identical topologies.
STREAM_NAMES = ("placement", "mobility", "loss", "protocol_delay", "sr", "traffic")


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    return {
        name: np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(i,))))
        for i, name in enumerate(STREAM_NAMES)
    }


def stream_key(seed: int, name: str) -> int:
    """64-bit key material for a named stream, for counter-keyed draws."""
    idx = STREAM_NAMES.index(name)
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(idx,))
    return int(seq.generate_state(1, np.uint64)[0])


class TimerHandle:
    __slots__ = ("fired", "cancelled")

    def __init__(self):
        self.fired = False
        self.cancelled = False

    @property
    def active(self) -> bool:
        return not (self.fired or self.cancelled)


class Engine:
    """Single-run scheduler; dispatch order is (time, seq) lexicographic."""

    def __init__(self, trace: list | None = None):
        self.now = 0.0
        self._seq = 0
        self._queue: list = []
        self._handlers: list = [None] * len(KIND_NAMES)
        self.trace = trace  # optional list capturing (time, seq, kind) per dispatch

    def register(self, kind: int, handler) -> None:
        self._handlers[kind] = handler

    def schedule(self, time: float, kind: int, payload) -> None:
        if time < self.now:
            raise ValueError(f"cannot schedule event at {time} before now={self.now}")
        heapq.heappush(self._queue, (time, self._seq, kind, payload, None))
        self._seq += 1

    def schedule_timer(self, time: float, kind: int, payload) -> TimerHandle:
        if time < self.now:
            raise ValueError(f"cannot schedule timer at {time} before now={self.now}")
        handle = TimerHandle()
        heapq.heappush(self._queue, (time, self._seq, kind, payload, handle))
        self._seq += 1
        return handle

    def cancel(self, handle: TimerHandle) -> bool:
        """True if the timer was still pending; its handler will never run."""
        if handle is None or handle.fired or handle.cancelled:
            return False
        handle.cancelled = True
        return True

    def pending(self) -> int:
        return sum(1 for e in self._queue if e[4] is None or e[4].active)

    def run_until_quiescent(self, max_time: float) -> bool:
        """Process events in order until the queue is empty or the clock would
        pass max_time. Returns True if the queue drained (quiescent)."""
        queue = self._queue
        handlers = self._handlers
        trace = self.trace
        while queue:
            if queue[0][0] > max_time:
                return self.pending() == 0
            time, seq, kind, payload, handle = heapq.heappop(queue)
            if handle is not None:
                if handle.cancelled:
                    continue  # lazy deletion: cancelled timers never dispatch
                handle.fired = True
            self.now = time
            if trace is not None:
                trace.append((time, seq, kind))
            handlers[kind](payload)
        return True
