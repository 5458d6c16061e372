"""Superframe schedule data model.

A superframe is an ordered list of per-slot access policies over
(destination address, ToS) pairs. Superframes restart at every second
boundary; if the superframe length does not divide one second the
remainder of the second is guard time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .sim_kernel import MICROS_PER_SECOND

QueueKey = tuple[str, int]  # (destination address, tid)


def tid_for_tos(tos: int) -> int:
    # high 3 precedence bits of the ToS byte
    return (tos >> 5) & 0x7


def tos_for_tid(tid: int) -> int:
    return (tid & 0x7) << 5


@dataclass(frozen=True)
class AccessPolicy:
    entries: frozenset[tuple[str, int]] = frozenset()  # (dest address, tos)
    allow_all: bool = False

    @classmethod
    def guard(cls) -> "AccessPolicy":
        return cls()

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "AccessPolicy":
        return cls(entries=frozenset(pairs))

    @property
    def is_guard(self) -> bool:
        return not self.allow_all and not self.entries

    def permits(self, dest: str, tid: int) -> bool:
        if self.allow_all:
            return True
        return any(d == dest and tid_for_tos(tos) == tid for d, tos in self.entries)


class SlotPosition(NamedTuple):
    index: int | None  # None while in the tail guard region
    into_slot: int
    tail: bool


@dataclass(frozen=True)
class Superframe:
    total_slots: int
    slot_duration: int  # microseconds
    policies: tuple[AccessPolicy, ...] = field(default=())

    def __post_init__(self):
        if self.total_slots < 1:
            raise ValueError("total_slots must be >= 1")
        if self.slot_duration <= 0:
            raise ValueError("slot_duration must be positive")
        if self.total_slots * self.slot_duration > MICROS_PER_SECOND:
            raise ValueError("superframe longer than the 1 s alignment period")
        if not self.policies:
            object.__setattr__(
                self, "policies", tuple(AccessPolicy.guard() for _ in range(self.total_slots)))
        elif len(self.policies) != self.total_slots:
            raise ValueError("policies length must equal total_slots")

    @property
    def length(self) -> int:
        return self.total_slots * self.slot_duration

    def set_access_policy(self, slot_index: int, policy: AccessPolicy) -> "Superframe":
        if not 0 <= slot_index < self.total_slots:
            raise IndexError(f"slot index {slot_index} out of range")
        policies = list(self.policies)
        policies[slot_index] = policy
        return Superframe(self.total_slots, self.slot_duration, tuple(policies))

    def is_allowed(self, slot_index: int, dest: str, tid: int) -> bool:
        if not 0 <= slot_index < self.total_slots:
            raise IndexError(f"slot index {slot_index} out of range")
        return self.policies[slot_index].permits(dest, tid)

    def slot_at(self, local_time: int) -> SlotPosition:
        if local_time < 0:
            raise ValueError("local_time must be non-negative")
        t = local_time % MICROS_PER_SECOND
        tail_start = (MICROS_PER_SECOND // self.length) * self.length
        if t >= tail_start:
            return SlotPosition(None, t - tail_start, True)
        index = (t // self.slot_duration) % self.total_slots
        return SlotPosition(index, t % self.slot_duration, False)

    def next_boundary(self, local_time: int) -> int:
        """First slot edge (including second marks and tail starts) > local_time."""
        second = local_time // MICROS_PER_SECOND
        t = local_time % MICROS_PER_SECOND
        tail_start = (MICROS_PER_SECOND // self.length) * self.length
        if t >= tail_start:
            return (second + 1) * MICROS_PER_SECOND
        nxt = (t // self.slot_duration + 1) * self.slot_duration
        if nxt > tail_start:
            nxt = tail_start
        return second * MICROS_PER_SECOND + nxt

    def gate_set_for(self, slot_index: int, known_queues: set[QueueKey]) -> frozenset[QueueKey]:
        """Queue keys to pause for a slot: everything the policy forbids."""
        return frozenset(k for k in known_queues if not self.is_allowed(slot_index, k[0], k[1]))

    def gate_set_at(self, pos: SlotPosition, known_queues: set[QueueKey]) -> frozenset[QueueKey]:
        if pos.tail:
            return frozenset(known_queues)
        return self.gate_set_for(pos.index, known_queues)


def new_superframe(total_slots: int, slot_duration: int) -> Superframe:
    """Fresh superframe with every slot set to the guard policy."""
    return Superframe(total_slots, slot_duration)
