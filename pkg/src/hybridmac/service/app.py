"""FastAPI application wrapping the simulator core."""
from __future__ import annotations

from dataclasses import asdict, replace

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..experiment import MODES, build_example, build_schedules, run, run_matrix
from ..scenario_io import scenario_from_dict, scenario_to_dict
from .models import (CompareRequest, CompareResponse, HealthResponse,
                     LinkMetricsModel, MetricsModel, PolicyEntryModel,
                     ReportRowModel, RunRequest, RunResponse, ScenarioModel,
                     ScheduleRequest, ScheduleResponse, SlotModel)

app = FastAPI(title="hybridmac", version=__version__)


def _scenario_from_model(model: ScenarioModel):
    try:
        return scenario_from_dict(model.model_dump())
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/example/{n}", response_model=ScenarioModel)
def example(n: int) -> ScenarioModel:
    try:
        scenario = build_example(n)
    except ValueError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    return ScenarioModel.model_validate(scenario_to_dict(scenario))


@app.post("/run", response_model=RunResponse)
def run_endpoint(req: RunRequest) -> RunResponse:
    scenario = _scenario_from_model(req.scenario)
    overrides = {}
    if req.mode is not None:
        overrides["mode"] = req.mode
    if req.seed is not None:
        overrides["seed"] = req.seed
    if req.duration_s is not None:
        overrides["duration_s"] = req.duration_s
    if overrides:
        scenario = replace(scenario, **overrides)
    if scenario.mode not in MODES:
        raise HTTPException(status_code=422, detail=f"unknown mode {scenario.mode!r}")
    result = run(scenario, with_event_trace=req.include_trace)
    m = result.metrics
    return RunResponse(
        scenario=scenario.name, mode=scenario.mode, seed=scenario.seed,
        duration_s=scenario.duration_s,
        metrics=MetricsModel(
            per_link={label: LinkMetricsModel(**asdict(lm))
                      for label, lm in m.per_link.items()},
            total_goodput_bps=m.total_goodput_bps,
            overruns=m.overruns),
        trace=result.event_trace)


@app.post("/compare", response_model=CompareResponse)
def compare(req: CompareRequest) -> CompareResponse:
    scenario = _scenario_from_model(req.scenario)
    bad = [m for m in req.modes if m not in MODES]
    if bad or not req.modes or not req.seeds:
        raise HTTPException(status_code=422,
                            detail=f"modes must be non-empty subset of {MODES}, "
                                   f"seeds non-empty; got modes={req.modes}")
    rows = run_matrix(scenario, req.modes, req.seeds)
    return CompareResponse(scenario=scenario.name,
                           rows=[ReportRowModel(**asdict(r)) for r in rows])


@app.post("/schedule", response_model=ScheduleResponse)
def schedule(req: ScheduleRequest) -> ScheduleResponse:
    scenario = _scenario_from_model(req.scenario)
    if req.mode is not None:
        scenario = replace(scenario, mode=req.mode)
    if scenario.mode == "dcf":
        raise HTTPException(status_code=422,
                            detail="dcf mode has no schedule; use tdma or hmac")
    plan = build_schedules(scenario)
    labels = {n.id: n.label for n in scenario.topology.nodes}
    frames = {}
    for ap, sf in sorted(plan.superframes.items()):
        slots = []
        for i in range(sf.total_slots):
            policy = sf.policies[i]
            slots.append(SlotModel(
                index=i, allow_all=policy.allow_all, guard=policy.is_guard,
                entries=[PolicyEntryModel(dest=d, tos=t)
                         for d, t in sorted(policy.entries)]))
        frames[labels[ap]] = slots
    return ScheduleResponse(
        mode=scenario.mode,
        total_slots=plan.plan.total_slots,
        slot_duration_us=plan.plan.slot_duration,
        guard_slots=sorted(plan.plan.guard_slots),
        permitted={scenario.link_label(l): sorted(s)
                   for l, s in plan.plan.permitted.items()},
        superframes=frames)
