"""Deterministic discrete-event engine with per-node clocks.

All simulation time is integer microseconds. Randomness must come from
seeded per-node streams (see make_rng) so that event interleaving never
changes the draws a node sees.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

MICROS_PER_SECOND = 1_000_000


class SchedulingError(Exception):
    """Raised when an event is scheduled before the current time."""


@dataclass(order=True)
class Event:
    fire_at: int
    seq: int
    action: Callable[[], None] = field(compare=False)
    cancelled: bool = field(default=False, compare=False)
    tag: str = field(default="", compare=False)


class EventQueue:
    """Min-heap of events ordered by (fire_at, seq); FIFO among ties."""

    def __init__(self, trace: Optional[list[str]] = None):
        self._heap: list[Event] = []
        self._seq = 0
        self.now = 0
        self.trace = trace

    def schedule(self, fire_at: int, action: Callable[[], None], tag: str = "") -> Event:
        if fire_at < self.now:
            raise SchedulingError(f"cannot schedule at {fire_at}, now is {self.now}")
        ev = Event(fire_at, self._seq, action, tag=tag)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def cancel(self, handle: Event) -> None:
        handle.cancelled = True

    def run_until(self, end_time: int) -> int:
        executed = 0
        last = (self.now, -1)
        while self._heap and self._heap[0].fire_at <= end_time:
            ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            assert (ev.fire_at, ev.seq) >= last, "event executed out of order"
            last = (ev.fire_at, ev.seq)
            self.now = ev.fire_at
            if self.trace is not None:
                self.trace.append(f"{ev.fire_at} {ev.tag}")
            ev.action()
            executed += 1
        self.now = max(self.now, end_time)
        return executed


@dataclass(frozen=True)
class Clock:
    """Affine local clock: local(t) = t + offset + drift_ppm * t / 1e6."""

    offset_us: int = 0
    drift_ppm: float = 0.0

    def local_time(self, true_time: int) -> int:
        if true_time < 0:
            raise ValueError("true_time must be non-negative")
        return round(true_time + self.offset_us + self.drift_ppm * true_time / 1e6)

    def true_time(self, local: int) -> int:
        # inverse of the affine map, rounded to the nearest microsecond
        return round((local - self.offset_us) * 1e6 / (1e6 + self.drift_ppm))


def make_rng(seed: int, stream: str) -> random.Random:
    """Independent deterministic substream for one (seed, purpose) pair."""
    return random.Random(f"{seed}:{stream}")
