import pytest

from hybridmac.schedule import AccessPolicy, new_superframe
from hybridmac.topology import AP, STA, Link, Node, Topology

# the sample driver configuration: 10 slots of 20 ms, best-effort traffic
# (ToS 0) to one station allowed in slots 1-4, everything else guard
SAMPLE_DEST = "34:13:e8:24:77:be"
SAMPLE_BE_SLOTS = [1, 2, 3, 4]


def sample_superframe():
    sf = new_superframe(10, 20000)
    for slot in SAMPLE_BE_SLOTS:
        sf = sf.set_access_policy(slot, AccessPolicy.of((SAMPLE_DEST, 0)))
    return sf


@pytest.fixture
def two_node_topology():
    """One AP, one associated STA, fully connected."""
    nodes = [Node(0, "AP1", AP), Node(1, "STA1", STA, ap=0)]
    rel = {(0, 1), (1, 0)}
    return Topology(nodes, set(rel), set(rel))


@pytest.fixture
def solo_link():
    return Link(0, 1, 6_000_000, 0)
