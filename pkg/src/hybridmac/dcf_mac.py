"""Per-node 802.11 DCF transmitter/receiver with gated per-(dest, TID) queues.

Carrier sensing uses the topology's senses relation; reception outcomes use
the interferes relation. ACKs are emitted contention-free after SIFS.
Pausing is non-preemptive: a frame already on the air finishes its data/ACK
exchange, but a frame still in backoff is returned to its queue.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .sim_kernel import EventQueue, Event
from .topology import Topology

DATA = "data"
ACK = "ack"

IDLE = "idle"
DEFER = "deferring"
BACKOFF = "backoff"
TX = "transmitting"
WAIT_ACK = "awaiting_ack"

NodeQueueKey = tuple[int, int]  # (dest node id, tid)


@dataclass
class PhyParams:
    slot_time: int = 9
    sifs: int = 16
    difs: int = 34
    cw_min: int = 15
    cw_max: int = 1023
    ack_duration: int = 44
    phy_preamble: int = 20
    retry_limit: int = 7
    queue_capacity: int = 1000

    def __post_init__(self):
        if self.difs != self.sifs + 2 * self.slot_time:
            raise ValueError("difs must equal sifs + 2 * slot_time")
        if not 0 < self.cw_min < self.cw_max:
            raise ValueError("need 0 < cw_min < cw_max")
        for name in ("slot_time", "sifs", "ack_duration", "phy_preamble"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def draw_backoff(rng: random.Random, retries: int, phy: PhyParams) -> int:
    """Uniform draw in [0, CW], CW = min(2^retries * (cw_min+1) - 1, cw_max)."""
    if retries < 0:
        raise ValueError("retries must be non-negative")
    cw = min((2 ** retries) * (phy.cw_min + 1) - 1, phy.cw_max)
    return rng.randint(0, cw)


def tx_duration(payload_bits: int, phy_rate: int, phy: PhyParams) -> int:
    if phy_rate <= 0:
        raise ValueError("phy_rate must be positive")
    if payload_bits <= 0:
        raise ValueError("payload_bits must be positive")
    return phy.phy_preamble + math.ceil(payload_bits * 1_000_000 / phy_rate)


@dataclass
class Frame:
    src: int
    dst: int
    tid: int
    payload_bits: int
    seq: int
    retries: int = 0


@dataclass
class Transmission:
    start: int
    end: int
    src: int
    dst: int
    kind: str
    frame: Frame
    corrupted: bool = False
    delivered: Optional[bool] = None


@dataclass
class LinkQueue:
    key: NodeQueueKey
    fifo: deque = field(default_factory=deque)
    paused: bool = False


class Medium:
    """Shared channel: overlap-based corruption and carrier-sense callbacks."""

    def __init__(self, topology: Topology, queue: EventQueue):
        self.topology = topology
        self.queue = queue
        self.active: list[Transmission] = []
        self.log: list[Transmission] = []
        self.nodes: dict[int, "MacNode"] = {}
        self._sensors: dict[int, list["MacNode"]] = {}

    def register(self, node: "MacNode") -> None:
        self.nodes[node.id] = node
        self._sensors.clear()

    def _sensors_of(self, src: int) -> list["MacNode"]:
        if src not in self._sensors:
            self._sensors[src] = [n for n in self.nodes.values()
                                  if n.id != src and self.topology.can_sense(n.id, src)]
        return self._sensors[src]

    def busy_for(self, node_id: int) -> bool:
        return any(tx.src != node_id and self.topology.can_sense(node_id, tx.src)
                   for tx in self.active)

    def begin(self, tx: Transmission) -> Transmission:
        # overlap between two active transmissions is always >= 1 us here
        # because starts/ends are integral and an active tx ends strictly later
        for other in self.active:
            if self.topology.does_interfere(tx.src, other.dst):
                other.corrupted = True
            if self.topology.does_interfere(other.src, tx.dst):
                tx.corrupted = True
        self.active.append(tx)
        self.log.append(tx)
        for node in self._sensors_of(tx.src):
            node.on_medium_busy()
        return tx

    def finish(self, tx: Transmission) -> bool:
        self.active.remove(tx)
        tx.delivered = (not tx.corrupted
                        and self.topology.does_interfere(tx.src, tx.dst))
        for node in self._sensors_of(tx.src):
            if not self.busy_for(node.id):
                node.on_medium_idle()
        return tx.delivered


class MacNode:
    """DCF state machine for one node; a single contention entity serves all
    unpaused queues round-robin."""

    def __init__(self, node_id: int, medium: Medium, queue: EventQueue,
                 phy: PhyParams, rng: random.Random):
        self.id = node_id
        self.medium = medium
        self.queue = queue
        self.phy = phy
        self.rng = rng
        medium.register(self)

        self.queues: dict[NodeQueueKey, LinkQueue] = {}
        self.rates: dict[NodeQueueKey, int] = {}
        self.order: list[NodeQueueKey] = []
        self.rr_next = 0

        self.phase = IDLE
        self.current_key: Optional[NodeQueueKey] = None
        self.current_frame: Optional[Frame] = None
        self.popped = False
        self.backoff_remaining = 0
        self.anchor = 0
        self.tx_event: Optional[Event] = None
        self.timeout_event: Optional[Event] = None

        # accounting
        self.enqueued: dict[NodeQueueKey, int] = {}
        self.completed: dict[NodeQueueKey, int] = {}
        self.dropped: dict[NodeQueueKey, int] = {}
        self.capacity_dropped: dict[NodeQueueKey, int] = {}
        self.retransmissions: dict[NodeQueueKey, int] = {}
        self.delivered_bits: dict[tuple[int, int], int] = {}  # receiver side, (src, tid)
        self._seen: set[tuple[int, int, int]] = set()
        self.frame_done_cb: Optional[Callable[[Frame, str], None]] = None

    # -- queue management ---------------------------------------------------

    def set_rate(self, key: NodeQueueKey, phy_rate: int) -> None:
        self.rates[key] = phy_rate

    def _queue_for(self, key: NodeQueueKey, paused: bool = False) -> LinkQueue:
        if key not in self.queues:
            self.queues[key] = LinkQueue(key, paused=paused)
            self.order.append(key)
        return self.queues[key]

    def enqueue(self, frame: Frame) -> str:
        key = (frame.dst, frame.tid)
        lq = self._queue_for(key)
        if len(lq.fifo) >= self.phy.queue_capacity:
            self.capacity_dropped[key] = self.capacity_dropped.get(key, 0) + 1
            return "dropped"
        lq.fifo.append(frame)
        self.enqueued[key] = self.enqueued.get(key, 0) + 1
        if self.phase == IDLE:
            self._maybe_start()
        return "accepted"

    def pause_queue(self, dest: int, tid: int) -> None:
        lq = self._queue_for((dest, tid), paused=True)
        lq.paused = True
        if self.current_key == lq.key and self.phase in (BACKOFF, DEFER):
            # frame not on the air yet: abort contention, keep it queued;
            # a frame mid-exchange (TX/WAIT_ACK) completes non-preemptively
            if self.tx_event is not None:
                self.queue.cancel(self.tx_event)
                self.tx_event = None
            if self.popped:
                lq.fifo.appendleft(self.current_frame)
                self.popped = False
            self.current_key = None
            self.current_frame = None
            self.phase = IDLE
            self._maybe_start()

    def unpause_queue(self, dest: int, tid: int) -> None:
        lq = self._queue_for((dest, tid))
        lq.paused = False
        if self.phase == IDLE:
            self._maybe_start()

    # -- contention ---------------------------------------------------------

    def _select_queue(self) -> Optional[NodeQueueKey]:
        n = len(self.order)
        for i in range(n):
            key = self.order[(self.rr_next + i) % n]
            lq = self.queues[key]
            if not lq.paused and lq.fifo:
                return key
        return None

    def _maybe_start(self) -> None:
        if self.phase != IDLE:
            return
        key = self._select_queue()
        if key is None:
            return
        self.current_key = key
        self.current_frame = self.queues[key].fifo[0]
        self.popped = False
        self.backoff_remaining = draw_backoff(self.rng, self.current_frame.retries, self.phy)
        self._begin()

    def _begin(self) -> None:
        if self.medium.busy_for(self.id):
            self.phase = DEFER
            return
        self.phase = BACKOFF
        self.anchor = self.queue.now
        fire = self.anchor + self.phy.difs + self.backoff_remaining * self.phy.slot_time
        self.tx_event = self.queue.schedule(fire, self._tx_start, tag=f"n{self.id} txstart")

    def on_medium_busy(self) -> None:
        if self.phase != BACKOFF or self.tx_event is None:
            return
        if self.queue.now >= self.tx_event.fire_at:
            return  # same-instant race: both picked this slot, let them collide
        elapsed = self.queue.now - (self.anchor + self.phy.difs)
        if elapsed > 0:
            self.backoff_remaining = max(0, self.backoff_remaining - elapsed // self.phy.slot_time)
        self.queue.cancel(self.tx_event)
        self.tx_event = None
        self.phase = DEFER

    def on_medium_idle(self) -> None:
        if self.phase == DEFER:
            self._begin()

    # -- data path ----------------------------------------------------------

    def _tx_start(self) -> None:
        self.tx_event = None
        key = self.current_key
        if key is None:
            return
        lq = self.queues[key]
        if not self.popped:
            if lq.paused or not lq.fifo:
                self.current_key = None
                self.current_frame = None
                self.phase = IDLE
                self._maybe_start()
                return
            frame = lq.fifo.popleft()
            assert frame is self.current_frame
            self.popped = True
        frame = self.current_frame
        self.phase = TX
        dur = tx_duration(frame.payload_bits, self.rates[key], self.phy)
        now = self.queue.now
        tx = Transmission(now, now + dur, self.id, frame.dst, DATA, frame)
        self.medium.begin(tx)
        self.queue.schedule(tx.end, lambda: self._tx_end(tx), tag=f"n{self.id} txend")

    def _tx_end(self, tx: Transmission) -> None:
        delivered = self.medium.finish(tx)
        if delivered:
            self.medium.nodes[tx.dst].receive_data(tx)
        self.phase = WAIT_ACK
        deadline = self.queue.now + self.phy.sifs + self.phy.ack_duration + 1
        self.timeout_event = self.queue.schedule(deadline, self._ack_timeout,
                                                 tag=f"n{self.id} acktimeout")

    def receive_data(self, tx: Transmission) -> None:
        frame = tx.frame
        dedup = (frame.src, frame.tid, frame.seq)
        if dedup not in self._seen:
            self._seen.add(dedup)
            k = (frame.src, frame.tid)
            self.delivered_bits[k] = self.delivered_bits.get(k, 0) + frame.payload_bits
        # duplicates are re-acknowledged: the sender may have lost the first ACK
        self.queue.schedule(self.queue.now + self.phy.sifs,
                            lambda: self._send_ack(frame), tag=f"n{self.id} ackstart")

    def _send_ack(self, frame: Frame) -> None:
        now = self.queue.now
        tx = Transmission(now, now + self.phy.ack_duration, self.id, frame.src, ACK, frame)
        self.medium.begin(tx)
        self.queue.schedule(tx.end, lambda: self._ack_end(tx), tag=f"n{self.id} ackend")

    def _ack_end(self, tx: Transmission) -> None:
        if self.medium.finish(tx):
            self.medium.nodes[tx.dst].on_ack(tx.frame)

    def on_ack(self, frame: Frame) -> None:
        if self.phase != WAIT_ACK or frame is not self.current_frame:
            return
        if self.timeout_event is not None:
            self.queue.cancel(self.timeout_event)
            self.timeout_event = None
        self._complete("success")

    def _ack_timeout(self) -> None:
        self.timeout_event = None
        frame = self.current_frame
        frame.retries += 1
        key = self.current_key
        if frame.retries > self.phy.retry_limit:
            self._complete("dropped")
            return
        self.retransmissions[key] = self.retransmissions.get(key, 0) + 1
        if self.queues[key].paused:
            # non-preemptive gating: the failed exchange completed, the frame
            # goes back to the head of its (now paused) queue
            self.queues[key].fifo.appendleft(frame)
            self.popped = False
            self.current_key = None
            self.current_frame = None
            self.phase = IDLE
            self._maybe_start()
            return
        self.backoff_remaining = draw_backoff(self.rng, frame.retries, self.phy)
        self._begin()

    def _complete(self, outcome: str) -> None:
        key = self.current_key
        frame = self.current_frame
        if outcome == "success":
            self.completed[key] = self.completed.get(key, 0) + 1
        else:
            self.dropped[key] = self.dropped.get(key, 0) + 1
        self.rr_next = (self.order.index(key) + 1) % len(self.order)
        self.current_key = None
        self.current_frame = None
        self.popped = False
        self.phase = IDLE
        if self.frame_done_cb is not None:
            self.frame_done_cb(frame, outcome)
        self._maybe_start()

    # -- accounting ---------------------------------------------------------

    def in_flight(self) -> int:
        return 1 if self.popped and self.current_frame is not None else 0

    def queued(self, key: NodeQueueKey) -> int:
        lq = self.queues.get(key)
        return len(lq.fifo) if lq else 0
