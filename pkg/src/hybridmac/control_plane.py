"""Per-node scheduler daemon and the user/kernel command channel.

The daemon ticks on its node's local clock at every slot boundary, diffs
the gate set against the next slot's policy and ships pause/unpause
commands through a FIFO channel with base latency plus uniform jitter.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .dcf_mac import MacNode, Medium, DATA
from .schedule import Superframe, QueueKey
from .sim_kernel import Clock, EventQueue
from .topology import Topology

PAUSE = "pause"
UNPAUSE = "unpause"


@dataclass(frozen=True)
class GateCommand:
    action: str  # pause | unpause
    key: tuple[int, int]  # (dest node id, tid)
    issued_at_slot: Optional[int]


@dataclass
class GateApplication:
    apply_time: int
    node: int
    action: str
    key: tuple[int, int]
    issued_at_slot: Optional[int]


@dataclass
class ControlChannel:
    """Latency-and-jitter channel; FIFO, commands cannot overtake."""

    base_latency: int = 0
    jitter: int = 0
    rng: random.Random = field(default_factory=random.Random)
    _last_delivery: int = 0

    def delivery_time(self, send_time: int) -> int:
        delay = self.base_latency
        if self.jitter > 0:
            delay += self.rng.randint(0, self.jitter)
        t = max(send_time + delay, self._last_delivery)
        self._last_delivery = t
        return t


class SchedulerDaemon:
    """Drives one AP's gates from its superframe, on its local clock."""

    def __init__(self, mac: MacNode, superframe: Superframe, clock: Clock,
                 channel: ControlChannel, queue: EventQueue,
                 known_queues: set[tuple[int, int]], mac_address_of: dict[int, str],
                 gate_log: Optional[list[GateApplication]] = None):
        self.mac = mac
        self.superframe = superframe
        self.clock = clock
        self.channel = channel
        self.queue = queue
        self.known_queues = set(known_queues)
        self.mac_address_of = mac_address_of
        self.gate_log = gate_log if gate_log is not None else []
        self.current_paused: frozenset[tuple[int, int]] = frozenset()

    def start(self) -> None:
        local_now = self.clock.local_time(self.queue.now)
        self._tick_at_local(local_now)

    def _target_gates(self, local_time: int) -> frozenset[tuple[int, int]]:
        pos = self.superframe.slot_at(local_time)
        if pos.tail:
            return frozenset(self.known_queues)
        return frozenset(
            k for k in self.known_queues
            if not self.superframe.is_allowed(pos.index, self.mac_address_of[k[0]], k[1]))

    def slot_tick(self, local_time: int) -> list[GateCommand]:
        """Commands needed to move the gate set to the slot starting now."""
        pos = self.superframe.slot_at(local_time)
        slot = pos.index
        target = self._target_gates(local_time)
        commands = [GateCommand(PAUSE, k, slot) for k in sorted(target - self.current_paused)]
        commands += [GateCommand(UNPAUSE, k, slot) for k in sorted(self.current_paused - target)]
        self.current_paused = target
        return commands

    def _tick_at_local(self, local_time: int) -> None:
        for cmd in self.slot_tick(local_time):
            self.deliver(cmd)
        next_local = self.superframe.next_boundary(local_time)
        next_true = max(self.clock.true_time(next_local), self.queue.now + 1)
        self.queue.schedule(next_true, lambda: self._tick_at_local(next_local),
                            tag=f"n{self.mac.id} slot_tick")

    def deliver(self, command: GateCommand) -> None:
        t = self.channel.delivery_time(self.queue.now)
        if t == self.queue.now:
            # zero-latency channel: apply within the tick, before any MAC
            # event pending at this same microsecond
            self._apply(command, t)
        else:
            self.queue.schedule(t, lambda: self._apply(command, t),
                                tag=f"n{self.mac.id} gate_apply")

    def _apply(self, command: GateCommand, when: int) -> None:
        dest, tid = command.key
        if command.action == PAUSE:
            self.mac.pause_queue(dest, tid)
        else:
            self.mac.unpause_queue(dest, tid)
        self.gate_log.append(GateApplication(when, self.mac.id, command.action,
                                             command.key, command.issued_at_slot))


def overrun_count(medium: Medium, schedules: dict[int, Superframe],
                  topology: Topology) -> int:
    """Data transmissions starting in a true-time slot that forbids their link.

    In-flight completions of previously legal frames never register here:
    they continue, they do not start.
    """
    count = 0
    for tx in medium.log:
        if tx.kind != DATA or tx.src not in schedules:
            continue
        sf = schedules[tx.src]
        pos = sf.slot_at(tx.start)
        dest_mac = topology.node(tx.dst).mac
        if pos.tail or not sf.is_allowed(pos.index, dest_mac, tx.frame.tid):
            count += 1
    return count
