"""Nodes, links and the sensing/interference relations.

Both relations are binary and may be asymmetric (per-link power control).
senses(a, b) means node a hears node b's transmissions and will defer to
them; interferes(a, b) means a transmission by a corrupts reception at b.
"""
from __future__ import annotations

from dataclasses import dataclass, field

AP = "AP"
STA = "STA"


class TopologyError(Exception):
    """Malformed input, e.g. a link referencing an unknown node."""


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    role: str  # AP or STA
    ap: int | None = None  # associated AP, STAs only

    @property
    def mac(self) -> str:
        return "02:00:00:00:00:%02x" % self.id


@dataclass(frozen=True)
class Link:
    src: int
    dst: int
    phy_rate: int  # bits per second
    tid: int = 0


@dataclass
class Topology:
    nodes: list[Node]
    senses: set[tuple[int, int]] = field(default_factory=set)
    interferes: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self):
        self._by_id = {n.id: n for n in self.nodes}

    def node(self, node_id: int) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise TopologyError(f"unknown node id {node_id}") from None

    def can_sense(self, a: int, b: int) -> bool:
        return (a, b) in self.senses

    def does_interfere(self, a: int, b: int) -> bool:
        return (a, b) in self.interferes


def validate(topology: Topology, links: list[Link]) -> list[str]:
    """Check all structural invariants; violations are data, not failures."""
    out = []
    seen_ids = set()
    for n in topology.nodes:
        if n.id < 0:
            out.append(f"node {n.label}: negative id {n.id}")
        if n.id in seen_ids:
            out.append(f"duplicate node id {n.id}")
        seen_ids.add(n.id)
        if n.role == STA:
            if n.ap is None or n.ap not in {m.id for m in topology.nodes if m.role == AP}:
                out.append(f"STA {n.label}: not associated to exactly one AP")
        elif n.role != AP:
            out.append(f"node {n.label}: unknown role {n.role!r}")
    for rel_name, rel in (("senses", topology.senses), ("interferes", topology.interferes)):
        for (a, b) in rel:
            if a == b:
                out.append(f"{rel_name}({a},{b}): relation must be irreflexive")
            if a not in seen_ids or b not in seen_ids:
                out.append(f"{rel_name}({a},{b}): unknown node id")
    for (a, b) in topology.senses:
        if a != b and (a, b) not in topology.interferes:
            out.append(f"senses({a},{b}) holds but interferes({a},{b}) does not")
    for link in links:
        if link.src not in seen_ids or link.dst not in seen_ids:
            out.append(f"link {link.src}->{link.dst}: unknown node id")
            continue
        if not topology.does_interfere(link.src, link.dst):
            out.append(f"link {link.src}->{link.dst}: receiver not in range of transmitter")
        if not 0 <= link.tid <= 7:
            out.append(f"link {link.src}->{link.dst}: tid {link.tid} outside [0,7]")
        if link.phy_rate <= 0:
            out.append(f"link {link.src}->{link.dst}: non-positive phy_rate")
    return out


def _check_pair(topology: Topology, l1: Link, l2: Link) -> None:
    if l1 == l2:
        raise TopologyError("conflict predicates need two distinct links")
    for link in (l1, l2):
        topology.node(link.src)
        topology.node(link.dst)


def hidden_data_conflict(topology: Topology, l1: Link, l2: Link) -> bool:
    """Transmitters cannot defer to each other and a receiver gets corrupted.

    Links sharing a transmitter never conflict: a single node serializes
    its own transmissions.
    """
    _check_pair(topology, l1, l2)
    if l1.src == l2.src:
        return False
    if topology.can_sense(l1.src, l2.src):
        return False
    return (topology.does_interfere(l2.src, l1.dst)
            or topology.does_interfere(l1.src, l2.dst))


def ack_conflict(topology: Topology, l1: Link, l2: Link) -> bool:
    """A contention-free ACK from one receiver corrupts data at the other."""
    _check_pair(topology, l1, l2)
    if l1.dst == l2.dst:
        raise TopologyError("ack_conflict requires links with distinct receivers")
    if l1.src == l2.src:
        return False
    return (topology.does_interfere(l2.dst, l1.dst)
            or topology.does_interfere(l1.dst, l2.dst))


def link_conflicts(topology: Topology, links: list[Link]) -> set[frozenset[Link]]:
    """All unordered link pairs that must not be served simultaneously."""
    out: set[frozenset[Link]] = set()
    for i, l1 in enumerate(links):
        for l2 in links[i + 1:]:
            if (hidden_data_conflict(topology, l1, l2)
                    or hidden_data_conflict(topology, l2, l1)
                    or ack_conflict(topology, l1, l2)):
                out.add(frozenset((l1, l2)))
    return out
