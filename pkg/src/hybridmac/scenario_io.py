"""Scenario config files: a YAML key-value tree round-trippable to Scenario."""
from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import yaml

from .dcf_mac import PhyParams
from .experiment import ControlParams, Scenario, SourceSpec, SuperframeParams
from .sim_kernel import Clock
from .topology import Link, Node, Topology


def _traffic_key(link: Link) -> str:
    return f"{link.src}->{link.dst}/{link.tid}"


def scenario_to_dict(scenario: Scenario) -> dict:
    top = scenario.topology
    nodes = []
    for n in top.nodes:
        rec = {"id": n.id, "label": n.label, "role": n.role}
        if n.ap is not None:
            rec["ap"] = n.ap
        nodes.append(rec)
    max_id = max(n.id for n in top.nodes)
    offsets = [0] * (max_id + 1)
    drifts = [0.0] * (max_id + 1)
    for nid, clock in scenario.clocks.items():
        offsets[nid] = clock.offset_us
        drifts[nid] = clock.drift_ppm
    return {
        "name": scenario.name,
        "topology": {
            "nodes": nodes,
            "senses": sorted([a, b] for a, b in top.senses),
            "interferes": sorted([a, b] for a, b in top.interferes),
        },
        "links": [{"src": l.src, "dst": l.dst, "phy_rate": l.phy_rate, "tid": l.tid}
                  for l in scenario.links],
        "traffic": {
            _traffic_key(l): (None if spec is None
                              else {"kind": spec.kind, **({"rate_fps": spec.rate_fps}
                                                          if spec.kind == "poisson" else {})})
            for l, spec in scenario.traffic.items()
        },
        "mode": scenario.mode,
        "superframe": asdict(scenario.superframe)
        if not isinstance(scenario.superframe, SuperframeParams)
        else {"total_slots": scenario.superframe.total_slots,
              "slot_duration_us": scenario.superframe.slot_duration_us,
              "slots_per_group": scenario.superframe.slots_per_group,
              "guard_count": scenario.superframe.guard_count},
        "control": {"base_latency_us": scenario.control.base_latency_us,
                    "jitter_us": scenario.control.jitter_us},
        "clocks": {"offset_us": offsets, "drift_ppm": drifts},
        "duration_s": scenario.duration_s,
        "seed": scenario.seed,
        "payload_bits": scenario.payload_bits,
        "phy": asdict(scenario.phy),
        "notes": list(scenario.notes),
    }


def scenario_from_dict(tree: dict) -> Scenario:
    top_tree = tree["topology"]
    nodes = [Node(n["id"], n["label"], n["role"], n.get("ap")) for n in top_tree["nodes"]]
    topology = Topology(nodes,
                        {tuple(p) for p in top_tree.get("senses", [])},
                        {tuple(p) for p in top_tree.get("interferes", [])})
    links = [Link(l["src"], l["dst"], l["phy_rate"], l.get("tid", 0))
             for l in tree["links"]]
    traffic = {}
    traffic_tree = tree.get("traffic", {})
    for link in links:
        spec = traffic_tree.get(_traffic_key(link), {"kind": "saturated"})
        if spec is None:
            traffic[link] = None
        else:
            traffic[link] = SourceSpec(spec.get("kind", "saturated"),
                                       spec.get("rate_fps", 0.0))
    sf = tree.get("superframe", {})
    ctrl = tree.get("control", {})
    clocks = {}
    clock_tree = tree.get("clocks", {})
    offsets = clock_tree.get("offset_us", [])
    drifts = clock_tree.get("drift_ppm", [])
    for node in nodes:
        off = offsets[node.id] if node.id < len(offsets) else 0
        drift = drifts[node.id] if node.id < len(drifts) else 0.0
        if off or drift:
            clocks[node.id] = Clock(off, drift)
    phy = PhyParams(**tree.get("phy", {}))
    return Scenario(
        name=tree.get("name", "scenario"),
        topology=topology,
        links=links,
        traffic=traffic,
        mode=tree.get("mode", "dcf"),
        superframe=SuperframeParams(
            total_slots=sf.get("total_slots", 10),
            slot_duration_us=sf.get("slot_duration_us", 20000),
            slots_per_group=sf.get("slots_per_group", 4),
            guard_count=sf.get("guard_count", 2)),
        control=ControlParams(ctrl.get("base_latency_us", 0), ctrl.get("jitter_us", 0)),
        clocks=clocks,
        duration_s=tree.get("duration_s", 30.0),
        seed=tree.get("seed", 1),
        phy=phy,
        payload_bits=tree.get("payload_bits", 12000),
        notes=list(tree.get("notes", [])),
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(yaml.safe_load(fh))


def dump_scenario(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scenario_to_dict(scenario), fh, sort_keys=False)
