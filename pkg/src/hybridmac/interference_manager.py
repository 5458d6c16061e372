"""Centralized schedule synthesis from the link conflict graph.

Produces classical per-node TDMA superframes and per-link hybrid
superframes. Coloring is greedy highest-degree-first with total
tie-breaking, so identical inputs always yield identical plans.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .schedule import AccessPolicy, Superframe, new_superframe, tos_for_tid
from .topology import Link, Topology


class ScheduleCapacityError(Exception):
    """The requested slot layout does not fit in the superframe."""


@dataclass
class ConflictGraph:
    vertices: list[Link]
    edges: set[frozenset[Link]] = field(default_factory=set)

    def degree(self, link: Link) -> int:
        return sum(1 for e in self.edges if link in e)

    def neighbors(self, link: Link) -> set[Link]:
        out = set()
        for e in self.edges:
            if link in e:
                out |= set(e) - {link}
        return out


@dataclass
class SlotPlan:
    total_slots: int
    slot_duration: int
    guard_slots: set[int]
    permitted: dict[Link, set[int]]  # link -> permitted slot indices


@dataclass
class SchedulePlan:
    plan: SlotPlan
    superframes: dict[int, Superframe]  # AP node id -> superframe


def _link_sort_key(link: Link) -> tuple:
    return (link.src, link.dst, link.tid)


def _superframes_from_plan(topology: Topology, links: list[Link],
                           plan: SlotPlan) -> dict[int, Superframe]:
    """Express each AP's links' permitted slots as per-(dest, tos) policies."""
    frames: dict[int, Superframe] = {}
    by_ap: dict[int, list[Link]] = {}
    for link in links:
        by_ap.setdefault(link.src, []).append(link)
    for ap, ap_links in sorted(by_ap.items()):
        sf = new_superframe(plan.total_slots, plan.slot_duration)
        for slot in range(plan.total_slots):
            if slot in plan.guard_slots:
                continue
            pairs = [(topology.node(l.dst).mac, tos_for_tid(l.tid))
                     for l in ap_links if slot in plan.permitted[l]]
            if pairs:
                sf = sf.set_access_policy(slot, AccessPolicy.of(*pairs))
        frames[ap] = sf
    return frames


def make_per_node_schedule(topology: Topology, links: list[Link],
                           total_slots: int, slot_duration: int,
                           slots_per_ap: int, guard_count: int) -> SchedulePlan:
    """Classical TDMA: each AP gets a contiguous allow-all block; all of an
    AP's links share that block."""
    aps = sorted({l.src for l in links})
    if len(aps) * slots_per_ap + guard_count > total_slots:
        raise ScheduleCapacityError(
            f"{len(aps)} APs x {slots_per_ap} slots + {guard_count} guards "
            f"> {total_slots} slots")
    guard_slots = set(range(total_slots))
    blocks: dict[int, set[int]] = {}
    cursor = 0
    guards_left = guard_count
    for i, ap in enumerate(aps):
        blocks[ap] = set(range(cursor, cursor + slots_per_ap))
        cursor += slots_per_ap
        if guards_left > 0:  # one guard after each block, round-robin
            cursor += 1
            guards_left -= 1
    permitted = {l: set(blocks[l.src]) for l in links}
    for ap in aps:
        guard_slots -= blocks[ap]
    plan = SlotPlan(total_slots, slot_duration, guard_slots, permitted)
    frames: dict[int, Superframe] = {}
    for ap in aps:
        sf = new_superframe(total_slots, slot_duration)
        for slot in blocks[ap]:
            sf = sf.set_access_policy(slot, AccessPolicy(allow_all=True))
        frames[ap] = sf
    return SchedulePlan(plan, frames)


def greedy_coloring(graph: ConflictGraph) -> dict[Link, int]:
    """Highest-degree-first greedy coloring of conflicted vertices only."""
    conflicted = [v for v in graph.vertices if graph.degree(v) > 0]
    conflicted.sort(key=lambda v: (-graph.degree(v), _link_sort_key(v)))
    colors: dict[Link, int] = {}
    for v in conflicted:
        used = {colors[n] for n in graph.neighbors(v) if n in colors}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def make_per_link_schedule(topology: Topology, graph: ConflictGraph,
                           total_slots: int, slot_duration: int,
                           slots_per_group: int, guard_count: int) -> SchedulePlan:
    """Hybrid schedule: each color class of conflicting links gets a disjoint
    slot block; unconflicted links are permitted in every non-guard slot."""
    colors = greedy_coloring(graph)
    n_colors = max(colors.values()) + 1 if colors else 0
    if n_colors * slots_per_group + guard_count > total_slots:
        raise ScheduleCapacityError(
            f"{n_colors} colors x {slots_per_group} slots + {guard_count} guards "
            f"> {total_slots} slots")
    blocks: dict[int, set[int]] = {}
    cursor = 0
    guards_left = guard_count
    for c in range(n_colors):
        blocks[c] = set(range(cursor, cursor + slots_per_group))
        cursor += slots_per_group
        if guards_left > 0:
            cursor += 1
            guards_left -= 1
    colored_slots = set().union(*blocks.values()) if blocks else set()
    # exactly guard_count guards, preferring the gaps between color blocks;
    # any further leftover slots stay open for unconflicted links
    leftover = sorted(set(range(total_slots)) - colored_slots)
    guard_slots = set(leftover[:guard_count])
    open_slots = (set(range(total_slots)) - guard_slots)
    permitted: dict[Link, set[int]] = {}
    for link in graph.vertices:
        if link in colors:
            permitted[link] = set(blocks[colors[link]])
        else:
            permitted[link] = set(open_slots)
    plan = SlotPlan(total_slots, slot_duration, guard_slots, permitted)
    return SchedulePlan(plan, _superframes_from_plan(topology, graph.vertices, plan))


def verify_plan(graph: ConflictGraph, plan: SlotPlan) -> list[str]:
    """Empty iff conflicting pairs get disjoint slots and guards stay empty."""
    out = []
    for edge in sorted(graph.edges, key=lambda e: sorted(map(_link_sort_key, e))):
        l1, l2 = sorted(edge, key=_link_sort_key)
        shared = plan.permitted.get(l1, set()) & plan.permitted.get(l2, set())
        for slot in sorted(shared):
            out.append(f"conflicting links {l1.src}->{l1.dst} and {l2.src}->{l2.dst} "
                       f"both permitted in slot {slot}")
    for link, slots in plan.permitted.items():
        for slot in sorted(slots & plan.guard_slots):
            out.append(f"link {link.src}->{link.dst} permitted in guard slot {slot}")
    return out
