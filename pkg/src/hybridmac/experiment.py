"""Scenario construction, traffic sources, metric collection and the
three-mode comparison runner (plain DCF vs per-node TDMA vs hybrid)."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace
from typing import Optional

from . import topology as topo
from .control_plane import ControlChannel, GateApplication, SchedulerDaemon, overrun_count
from .dcf_mac import ACK, DATA, Frame, MacNode, Medium, PhyParams
from .interference_manager import (ConflictGraph, SchedulePlan,
                                   make_per_link_schedule, make_per_node_schedule)
from .schedule import Superframe
from .sim_kernel import Clock, EventQueue, make_rng
from .topology import Link, Topology

MODES = ("dcf", "tdma", "hmac")

SATURATED_DEPTH = 4


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "saturated"  # saturated | poisson
    rate_fps: float = 0.0  # poisson only


@dataclass(frozen=True)
class SuperframeParams:
    total_slots: int = 10
    slot_duration_us: int = 20000
    slots_per_group: int = 4
    guard_count: int = 2


@dataclass(frozen=True)
class ControlParams:
    base_latency_us: int = 0
    jitter_us: int = 0


@dataclass
class Scenario:
    name: str
    topology: Topology
    links: list[Link]
    traffic: dict[Link, SourceSpec]
    mode: str = "dcf"
    superframe: SuperframeParams = SuperframeParams()
    control: ControlParams = ControlParams()
    clocks: dict[int, Clock] = field(default_factory=dict)
    duration_s: float = 30.0
    seed: int = 1
    phy: PhyParams = field(default_factory=PhyParams)
    payload_bits: int = 12000
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        problems = topo.validate(self.topology, self.links)
        if problems:
            raise ValueError("invalid scenario: " + "; ".join(problems))

    def link_label(self, link: Link) -> str:
        return f"{self.topology.node(link.src).label}->{self.topology.node(link.dst).label}"


@dataclass
class LinkMetrics:
    delivered_bits: int = 0
    goodput_bps: float = 0.0
    data_collisions: int = 0
    ack_collisions: int = 0
    retransmissions: int = 0
    drops: int = 0
    airtime_fraction: float = 0.0


@dataclass
class Metrics:
    per_link: dict[str, LinkMetrics]
    total_goodput_bps: float
    overruns: int


@dataclass
class RunResult:
    metrics: Metrics
    medium_log: list
    gate_log: list[GateApplication]
    schedules: dict[int, Superframe]
    event_trace: Optional[list[str]] = None


def build_example(n: int) -> Scenario:
    """Desk-scale hidden-node scenarios: 1 = hidden transmitters, 2 = ACK/data
    coupling between receivers, 3 = per-link power control asymmetry."""
    if n == 1:
        nodes = [topo.Node(0, "AP1", topo.AP), topo.Node(1, "AP2", topo.AP),
                 topo.Node(2, "STA1", topo.STA, ap=1), topo.Node(3, "STA2", topo.STA, ap=0),
                 topo.Node(4, "STA3", topo.STA, ap=0)]
        bss = [(0, 3), (3, 0), (0, 4), (4, 0), (1, 2), (2, 1)]
        senses = set(bss)
        interferes = set(bss) | {(1, 3)}  # AP2 corrupts reception at STA2
        links = [Link(0, 3, 6_000_000, 0), Link(0, 4, 6_000_000, 0), Link(1, 2, 6_000_000, 0)]
        notes = ["receiver-receiver interference assumed absent except where drawn"]
    elif n == 2:
        nodes = [topo.Node(0, "AP1", topo.AP), topo.Node(1, "AP2", topo.AP),
                 topo.Node(2, "STA1", topo.STA, ap=1), topo.Node(3, "STA2", topo.STA, ap=0),
                 topo.Node(4, "STA3", topo.STA, ap=0), topo.Node(5, "STA4", topo.STA, ap=0)]
        bss = [(0, 3), (3, 0), (0, 4), (4, 0), (0, 5), (5, 0), (1, 2), (2, 1)]
        senses = set(bss) | {(0, 1), (1, 0)}  # APs are within sensing range
        interferes = set(senses) | {(2, 3), (3, 2)}  # STA1/STA2 ACK coupling
        links = [Link(0, 3, 6_000_000, 0), Link(1, 2, 6_000_000, 0),
                 Link(0, 4, 6_000_000, 0), Link(0, 5, 6_000_000, 0)]
        notes = ["STA3/STA4 assumed not interference-coupled to STA1/STA2"]
    elif n == 3:
        nodes = [topo.Node(0, "AP1", topo.AP), topo.Node(1, "AP2", topo.AP),
                 topo.Node(2, "STA1", topo.STA, ap=1), topo.Node(3, "STA2", topo.STA, ap=0),
                 topo.Node(4, "STA3", topo.STA, ap=0), topo.Node(5, "STA4", topo.STA, ap=0)]
        bss = [(0, 3), (3, 0), (0, 4), (4, 0), (0, 5), (5, 0), (1, 2), (2, 1)]
        # AP2 runs reduced power: AP2 hears AP1 but not the other way round
        senses = set(bss) | {(1, 0)}
        interferes = set(senses) | {(1, 3)}  # reduced power still reaches nearby STA2
        links = [Link(0, 3, 6_000_000, 0), Link(0, 4, 6_000_000, 0),
                 Link(0, 5, 6_000_000, 0), Link(1, 2, 6_000_000, 0)]
        notes = ["power control modeled through asymmetric senses/interferes"]
    else:
        raise ValueError(f"example number must be 1, 2 or 3, got {n}")
    topology = Topology(nodes, senses, interferes)
    traffic = {l: SourceSpec("saturated") for l in links}
    return Scenario(f"example{n}", topology, links, traffic, notes=notes)


def build_schedules(scenario: Scenario) -> Optional[SchedulePlan]:
    sp = scenario.superframe
    if scenario.mode == "dcf":
        return None
    if scenario.mode == "tdma":
        return make_per_node_schedule(scenario.topology, scenario.links,
                                      sp.total_slots, sp.slot_duration_us,
                                      sp.slots_per_group, sp.guard_count)
    if scenario.mode == "hmac":
        graph = ConflictGraph(list(scenario.links),
                              topo.link_conflicts(scenario.topology, scenario.links))
        return make_per_link_schedule(scenario.topology, graph,
                                      sp.total_slots, sp.slot_duration_us,
                                      sp.slots_per_group, sp.guard_count)
    raise ValueError(f"unknown mode {scenario.mode!r}")


class _SaturatedSource:
    """Keeps a fixed backlog in one link queue."""

    def __init__(self, mac: MacNode, link: Link, payload_bits: int):
        self.mac = mac
        self.link = link
        self.payload_bits = payload_bits
        self.seq = 0

    def fill(self) -> None:
        for _ in range(SATURATED_DEPTH):
            self.push()

    def push(self) -> None:
        self.mac.enqueue(Frame(self.link.src, self.link.dst, self.link.tid,
                               self.payload_bits, self.seq))
        self.seq += 1

    def on_done(self, frame: Frame, outcome: str) -> None:
        self.push()


class _PoissonSource:
    def __init__(self, mac: MacNode, link: Link, payload_bits: int,
                 rate_fps: float, queue: EventQueue, rng):
        self.mac = mac
        self.link = link
        self.payload_bits = payload_bits
        self.rate = rate_fps
        self.queue = queue
        self.rng = rng
        self.seq = 0

    def start(self) -> None:
        self._arm()

    def _arm(self) -> None:
        gap = max(1, round(self.rng.expovariate(self.rate) * 1e6))
        self.queue.schedule(self.queue.now + gap, self._arrive, tag="poisson")

    def _arrive(self) -> None:
        self.mac.enqueue(Frame(self.link.src, self.link.dst, self.link.tid,
                               self.payload_bits, self.seq))
        self.seq += 1
        self._arm()

    def on_done(self, frame: Frame, outcome: str) -> None:
        pass


def check_conservation(macs: dict[int, MacNode]) -> list[str]:
    """Enqueued = completed + dropped + still-queued + in-flight, per queue."""
    out = []
    for mac in macs.values():
        for key in mac.order:
            enq = mac.enqueued.get(key, 0)
            done = mac.completed.get(key, 0) + mac.dropped.get(key, 0)
            queued = mac.queued(key)
            flight = mac.in_flight() if mac.current_key == key and mac.popped else 0
            if enq != done + queued + flight:
                out.append(f"node {mac.id} queue {key}: {enq} != "
                           f"{done}+{queued}+{flight}")
    return out


def run(scenario: Scenario, with_event_trace: bool = False) -> RunResult:
    """Simulate one scenario deterministically and collect metrics."""
    top = scenario.topology
    duration_us = round(scenario.duration_s * 1e6)
    trace: Optional[list[str]] = [] if with_event_trace else None
    queue = EventQueue(trace)
    medium = Medium(top, queue)
    macs = {n.id: MacNode(n.id, medium, queue, scenario.phy,
                          make_rng(scenario.seed, f"mac{n.id}"))
            for n in top.nodes}
    for link in scenario.links:
        macs[link.src].set_rate((link.dst, link.tid), link.phy_rate)

    plan = build_schedules(scenario)
    schedules = dict(plan.superframes) if plan else {}
    gate_log: list[GateApplication] = []
    for ap, sf in sorted(schedules.items()):
        known = {(l.dst, l.tid) for l in scenario.links if l.src == ap}
        channel = ControlChannel(scenario.control.base_latency_us,
                                 scenario.control.jitter_us,
                                 make_rng(scenario.seed, f"ctrl{ap}"))
        daemon = SchedulerDaemon(macs[ap], sf, scenario.clocks.get(ap, Clock()),
                                 channel, queue, known,
                                 {n.id: n.mac for n in top.nodes}, gate_log)
        daemon.start()

    sources = {}
    for link, spec in scenario.traffic.items():
        if spec is None:
            continue
        mac = macs[link.src]
        if spec.kind == "saturated":
            src = _SaturatedSource(mac, link, scenario.payload_bits)
            src.fill()
        elif spec.kind == "poisson":
            src = _PoissonSource(mac, link, scenario.payload_bits, spec.rate_fps,
                                 queue, make_rng(scenario.seed, f"arrivals{link.src}-{link.dst}"))
            src.start()
        else:
            raise ValueError(f"unknown traffic kind {spec.kind!r}")
        sources[(link.src, link.dst, link.tid)] = src

    def dispatch_done(mac_id):
        def cb(frame: Frame, outcome: str) -> None:
            src = sources.get((frame.src, frame.dst, frame.tid))
            if src is not None:
                src.on_done(frame, outcome)
        return cb

    for mac in macs.values():
        mac.frame_done_cb = dispatch_done(mac.id)

    queue.run_until(duration_us)

    broken = check_conservation(macs)
    if broken:
        raise AssertionError("frame conservation violated: " + "; ".join(broken))

    metrics = _collect(scenario, macs, medium, schedules, duration_us)
    return RunResult(metrics, medium.log, gate_log, schedules, trace)


def _collect(scenario: Scenario, macs: dict[int, MacNode], medium: Medium,
             schedules: dict[int, Superframe], duration_us: int) -> Metrics:
    per_link: dict[str, LinkMetrics] = {}
    stats: dict[tuple[int, int, int], LinkMetrics] = {}
    for link in scenario.links:
        lm = LinkMetrics()
        lm.delivered_bits = macs[link.dst].delivered_bits.get((link.src, link.tid), 0)
        lm.goodput_bps = lm.delivered_bits / (duration_us / 1e6)
        key = (link.dst, link.tid)
        sender = macs[link.src]
        lm.retransmissions = sender.retransmissions.get(key, 0)
        lm.drops = sender.dropped.get(key, 0) + sender.capacity_dropped.get(key, 0)
        stats[(link.src, link.dst, link.tid)] = lm
        per_link[scenario.link_label(link)] = lm
    for tx in medium.log:
        if tx.kind == DATA:
            k = (tx.src, tx.dst, tx.frame.tid)
        else:
            k = (tx.frame.src, tx.frame.dst, tx.frame.tid)
        lm = stats.get(k)
        if lm is None:
            continue
        if tx.kind == DATA:
            lm.airtime_fraction += (tx.end - tx.start) / duration_us
            if tx.delivered is False:
                lm.data_collisions += 1
        elif tx.delivered is False:
            lm.ack_collisions += 1
    total = sum(lm.goodput_bps for lm in per_link.values())
    overruns = overrun_count(medium, schedules, scenario.topology) if schedules else 0
    return Metrics(per_link, total, overruns)


def isolated_baseline(scenario: Scenario, link: Link) -> float:
    """Goodput of one link running alone under plain DCF."""
    if link not in scenario.links:
        raise ValueError("link not part of the scenario")
    solo = replace(scenario, mode="dcf",
                   traffic={link: scenario.traffic.get(link, SourceSpec())})
    return run(solo).metrics.per_link[scenario.link_label(link)].goodput_bps


def delivery_ratios(scenario: Scenario, l1: Link, l2: Link,
                    duration_s: float = 5.0) -> dict[Link, float]:
    """Per-attempt data delivery ratios of two links co-simulated with no
    gating; the independent oracle behind the conflict predicates."""
    pair = replace(scenario, mode="dcf", duration_s=duration_s,
                   traffic={l1: SourceSpec(), l2: SourceSpec()})
    result = run(pair)
    attempts = {l1: 0, l2: 0}
    delivered = {l1: 0, l2: 0}
    by_key = {(l.src, l.dst, l.tid): l for l in (l1, l2)}
    for tx in result.medium_log:
        if tx.kind != DATA:
            continue
        link = by_key.get((tx.src, tx.dst, tx.frame.tid))
        if link is None or tx.delivered is None:
            continue  # still in flight when the run ended
        attempts[link] += 1
        if tx.delivered:
            delivered[link] += 1
    return {l: (delivered[l] / attempts[l]) if attempts[l] else 1.0 for l in (l1, l2)}


@dataclass
class ReportRow:
    mode: str
    link: str
    goodput_bps_mean: float
    goodput_bps_stderr: float
    data_collisions: float
    retransmissions: float
    airtime_fraction: float


def run_matrix(scenario: Scenario, modes: list[str], seeds: list[int]) -> list[ReportRow]:
    """Per (mode, link) mean and standard error of goodput across seeds,
    plus one totals row per mode."""
    if not modes or not seeds:
        raise ValueError("need at least one mode and one seed")
    rows: list[ReportRow] = []
    for mode in modes:
        samples: dict[str, list[float]] = {}
        coll: dict[str, list[float]] = {}
        retr: dict[str, list[float]] = {}
        air: dict[str, list[float]] = {}
        totals: list[float] = []
        for seed in seeds:
            sc = replace(scenario, mode=mode, seed=seed)
            m = run(sc).metrics
            for label, lm in m.per_link.items():
                samples.setdefault(label, []).append(lm.goodput_bps)
                coll.setdefault(label, []).append(lm.data_collisions)
                retr.setdefault(label, []).append(lm.retransmissions)
                air.setdefault(label, []).append(lm.airtime_fraction)
            totals.append(m.total_goodput_bps)
        for label in sorted(samples):
            rows.append(ReportRow(mode, label,
                                  statistics.fmean(samples[label]),
                                  _stderr(samples[label]),
                                  statistics.fmean(coll[label]),
                                  statistics.fmean(retr[label]),
                                  statistics.fmean(air[label])))
        rows.append(ReportRow(mode, "TOTAL", statistics.fmean(totals), _stderr(totals),
                              sum(statistics.fmean(coll[l]) for l in coll),
                              sum(statistics.fmean(retr[l]) for l in retr),
                              sum(statistics.fmean(air[l]) for l in air)))
    return rows


def _stderr(xs: list[float]) -> float:
    if len(xs) < 2:
        return 0.0
    return statistics.stdev(xs) / math.sqrt(len(xs))
