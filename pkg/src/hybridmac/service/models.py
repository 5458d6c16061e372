"""Pydantic request/response models for the HTTP API.

The scenario tree mirrors the YAML config schema one-to-one, so a config
file can be posted as-is and a response body saved back to disk.
"""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class NodeModel(BaseModel):
    id: int
    label: str
    role: str
    ap: Optional[int] = None


class TopologyModel(BaseModel):
    nodes: list[NodeModel]
    senses: list[tuple[int, int]] = Field(default_factory=list)
    interferes: list[tuple[int, int]] = Field(default_factory=list)


class LinkModel(BaseModel):
    src: int
    dst: int
    phy_rate: int
    tid: int = 0


class TrafficModel(BaseModel):
    kind: str = "saturated"
    rate_fps: float = 0.0


class SuperframeModel(BaseModel):
    total_slots: int = 10
    slot_duration_us: int = 20000
    slots_per_group: int = 4
    guard_count: int = 2


class ControlModel(BaseModel):
    base_latency_us: int = 0
    jitter_us: int = 0


class ClocksModel(BaseModel):
    offset_us: list[int] = Field(default_factory=list)
    drift_ppm: list[float] = Field(default_factory=list)


class ScenarioModel(BaseModel):
    name: str = "scenario"
    topology: TopologyModel
    links: list[LinkModel]
    traffic: dict[str, Optional[TrafficModel]] = Field(default_factory=dict)
    mode: str = "dcf"
    superframe: SuperframeModel = SuperframeModel()
    control: ControlModel = ControlModel()
    clocks: ClocksModel = ClocksModel()
    duration_s: float = 30.0
    seed: int = 1
    payload_bits: int = 12000
    phy: dict = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)


class RunRequest(BaseModel):
    scenario: ScenarioModel
    mode: Optional[str] = None
    seed: Optional[int] = None
    duration_s: Optional[float] = None
    include_trace: bool = False


class LinkMetricsModel(BaseModel):
    delivered_bits: int
    goodput_bps: float
    data_collisions: int
    ack_collisions: int
    retransmissions: int
    drops: int
    airtime_fraction: float


class MetricsModel(BaseModel):
    per_link: dict[str, LinkMetricsModel]
    total_goodput_bps: float
    overruns: int


class RunResponse(BaseModel):
    scenario: str
    mode: str
    seed: int
    duration_s: float
    metrics: MetricsModel
    trace: Optional[list[str]] = None


class CompareRequest(BaseModel):
    scenario: ScenarioModel
    modes: list[str]
    seeds: list[int]


class ReportRowModel(BaseModel):
    mode: str
    link: str
    goodput_bps_mean: float
    goodput_bps_stderr: float
    data_collisions: float
    retransmissions: float
    airtime_fraction: float


class CompareResponse(BaseModel):
    scenario: str
    rows: list[ReportRowModel]


class ScheduleRequest(BaseModel):
    scenario: ScenarioModel
    mode: Optional[str] = None


class PolicyEntryModel(BaseModel):
    dest: str
    tos: int


class SlotModel(BaseModel):
    index: int
    allow_all: bool
    guard: bool
    entries: list[PolicyEntryModel]


class ScheduleResponse(BaseModel):
    mode: str
    total_slots: int
    slot_duration_us: int
    guard_slots: list[int]
    permitted: dict[str, list[int]]  # link label -> slot indices
    superframes: dict[str, list[SlotModel]]  # AP label -> slot records


class HealthResponse(BaseModel):
    status: str
    version: str
