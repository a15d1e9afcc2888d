"""Derive model parameters from raw project metrics.

Every step is plain arithmetic and is echoed into a trace so the derivation
can be audited line by line.
"""
from __future__ import annotations

import json
import math
from dataclasses import MISSING, asdict, dataclass, field, fields

from .model import ProjectParameters


class CalibrationError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class ProjectMetrics:
    estimated_total_effort: float
    estimated_total_schedule: float
    delivered_loc: float
    actual_total_effort: float
    testing_fraction: float
    complexity_multiplier: float
    user_involvement_multiplier: float
    nominal_fraction_manday: float
    comm_loss_at_reference: float
    initial_size_loc: float
    initial_workforce: float
    sim_tasks_reference: float
    sim_loc_reference: float
    effort_deductions: dict[str, float] = field(default_factory=dict)
    schedule_deductions: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            values = v.values() if isinstance(v, dict) else [v]
            for x in values:
                if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                    raise CalibrationError(f.name, f"expected a finite number, got {x!r}")
                if x < 0:
                    raise CalibrationError(f.name, "must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectMetrics":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise CalibrationError(sorted(unknown)[0], "unknown metrics field")
        missing = [
            f.name for f in fields(cls)
            if f.name not in data and f.default is MISSING and f.default_factory is MISSING
        ]
        if missing:
            raise CalibrationError(missing[0], "missing required field")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ProjectMetrics":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TraceEntry:
    name: str
    formula: str
    value: float


@dataclass
class Calibration:
    parameters: ProjectParameters
    trace: list[TraceEntry]

    def to_dict(self) -> dict:
        return {
            "parameters": asdict(self.parameters),
            "trace": [asdict(e) for e in self.trace],
        }


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _net(total: float, deductions: dict[str, float], field_name: str) -> float:
    net = total - sum(deductions.values())
    if not net > 0:
        raise CalibrationError(field_name, f"deductions {sum(deductions.values()):g} leave nothing of {total:g}")
    return net


def effective_effort(metrics: ProjectMetrics) -> float:
    return _net(metrics.estimated_total_effort, metrics.effort_deductions, "effort_deductions")


def effective_schedule(metrics: ProjectMetrics) -> float:
    return _net(metrics.estimated_total_schedule, metrics.schedule_deductions, "schedule_deductions")


def realized_dev_productivity(metrics: ProjectMetrics) -> float:
    """Delivered LOC per person-day of pure development (testing share removed)."""
    if not metrics.testing_fraction < 1:
        raise CalibrationError("testing_fraction", "must be below 1")
    effort = (1 - metrics.testing_fraction) * metrics.actual_total_effort
    if not effort > 0:
        raise CalibrationError("actual_total_effort", "must be positive")
    return metrics.delivered_loc / effort


def motivation_comm_multiplier(nominal_fraction: float, comm_loss: float) -> float:
    return nominal_fraction * (1 - comm_loss)


def nominal_potential_productivity(realized: float, m_mc: float, m_cx: float, m_ui: float) -> float:
    for name, m in (("motivation_comm", m_mc), ("complexity", m_cx), ("user_involvement", m_ui)):
        if not m > 0:
            raise CalibrationError(name, "multiplier must be positive")
    return realized / (m_mc * m_cx * m_ui)


def loc_per_task(metrics: ProjectMetrics) -> float:
    if not metrics.sim_tasks_reference > 0:
        raise CalibrationError("sim_tasks_reference", "must be positive")
    return metrics.sim_loc_reference / metrics.sim_tasks_reference


def calibrate(metrics: ProjectMetrics) -> Calibration:
    trace: list[TraceEntry] = []
    m = metrics

    effort = effective_effort(m)
    trace.append(TraceEntry(
        "effort_estimate",
        f"{_fmt(m.estimated_total_effort)} − {_fmt(sum(m.effort_deductions.values()))} = {_fmt(effort)}",
        effort,
    ))
    schedule = effective_schedule(m)
    trace.append(TraceEntry(
        "schedule_estimate",
        f"{_fmt(m.estimated_total_schedule)} − {_fmt(sum(m.schedule_deductions.values()))} = {_fmt(schedule)}",
        schedule,
    ))
    dev_effort = (1 - m.testing_fraction) * m.actual_total_effort
    realized = realized_dev_productivity(m)
    trace.append(TraceEntry(
        "development_effort",
        f"(1 − {_fmt(m.testing_fraction)}) × {_fmt(m.actual_total_effort)} = {_fmt(dev_effort)}",
        dev_effort,
    ))
    trace.append(TraceEntry(
        "realized_productivity",
        f"{_fmt(m.delivered_loc)} / {_fmt(dev_effort)} = {_fmt(realized)}",
        realized,
    ))
    m_mc = motivation_comm_multiplier(m.nominal_fraction_manday, m.comm_loss_at_reference)
    trace.append(TraceEntry(
        "motivation_comm_multiplier",
        f"{_fmt(m.nominal_fraction_manday)} × (1 − {_fmt(m.comm_loss_at_reference)}) = {_fmt(m_mc)}",
        m_mc,
    ))
    npp = nominal_potential_productivity(
        realized, m_mc, m.complexity_multiplier, m.user_involvement_multiplier
    )
    trace.append(TraceEntry(
        "nominal_potential_productivity",
        f"{_fmt(realized)} / ({_fmt(m_mc)} × {_fmt(m.complexity_multiplier)} × "
        f"{_fmt(m.user_involvement_multiplier)}) = {_fmt(npp)}",
        npp,
    ))
    lpt = loc_per_task(m)
    trace.append(TraceEntry(
        "loc_per_task",
        f"{_fmt(m.sim_loc_reference)} / {_fmt(m.sim_tasks_reference)} = {_fmt(lpt)}",
        lpt,
    ))
    try:
        params = ProjectParameters(
            initial_size_loc=m.initial_size_loc,
            loc_per_task=lpt,
            effort_estimate=effort,
            schedule_estimate=schedule,
            nominal_potential_productivity=npp,
            nominal_fraction_manday=m.nominal_fraction_manday,
            complexity_multiplier=m.complexity_multiplier,
            user_involvement_multiplier=m.user_involvement_multiplier,
            initial_workforce=m.initial_workforce,
        )
    except ValueError as exc:
        name = str(exc).split(" ", 1)[0]
        raise CalibrationError(name, str(exc)) from None
    trace.append(TraceEntry(
        "initial_size_tasks",
        f"{_fmt(m.initial_size_loc)} / {_fmt(lpt)} = {_fmt(params.initial_size_tasks)}",
        params.initial_size_tasks,
    ))
    return Calibration(params, trace)
