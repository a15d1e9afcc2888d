"""Scenario files, run summaries, CSV output, comparison and pattern sweeps."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from datetime import date
from pathlib import Path
from typing import Any

import numpy as np

from . import volatility as vol
from .calibration import Calibration, ProjectMetrics, calibrate
from .engine import SimConfig, TableFunction
from .model import (
    EFFORT_BUCKETS,
    RECORDED_CHANNELS,
    PolicyParams,
    ProjectParameters,
    ProjectRun,
    run_project,
)

TIMESERIES_COLUMNS = ("day",) + RECORDED_CHANNELS
SIG_DIGITS = 9
DATA_DIR = Path(__file__).parent / "data"
ACBS_SCENARIO = DATA_DIR / "acbs_scenario.json"


class ScenarioError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class CompareError(ValueError):
    pass


def fmt_number(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def round_sig(x: float) -> float:
    return float(fmt_number(x))


# -- loading -------------------------------------------------------------------


@dataclass(frozen=True)
class TableVolatility:
    path: Path
    total_loc: int


@dataclass
class Scenario:
    params: ProjectParameters
    policy: PolicyParams
    volatility: TableVolatility | vol.VolatilityPattern
    sim: SimConfig
    project_start_date: date
    model_prefix_days: float = vol.DEFAULT_PREFIX_DAYS
    calibration: Calibration | None = None
    notes: list[str] = field(default_factory=list)
    source: Path | None = None

    def volatility_series(self) -> vol.VolatilitySeries:
        if isinstance(self.volatility, vol.VolatilityPattern):
            return vol.pattern_rate_series(self.volatility, self.params.loc_per_task, self.sim)
        crs = vol.load_cr_csv(self.volatility.path)
        return vol.cr_rate_series(
            crs,
            self.params.loc_per_task,
            self.project_start_date,
            self.model_prefix_days,
            self.sim,
            self.volatility.total_loc,
        )

    def run(self, policy: PolicyParams | None = None) -> ProjectRun:
        return run_project(self.params, policy or self.policy, self.volatility_series(), self.sim)


_TOP_KEYS = {"project", "policy", "volatility", "sim", "project_start_date", "model_prefix_days", "notes"}
_REQUIRED = ("project", "volatility", "sim", "project_start_date")


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        prefix = f"{where}." if where else ""
        raise ScenarioError(prefix + unknown[0], "unknown key")


def _read_json(path: Path, key: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(key, f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(key, f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(key, f"expected a number, got {value!r}")
    return float(value)


def policy_from_dict(data: dict | None) -> PolicyParams:
    if not data:
        return PolicyParams()
    names = {f.name: f for f in fields(PolicyParams)}
    _reject_unknown(data, set(names), "policy")
    kw = {}
    for key, value in data.items():
        full = f"policy.{key}"
        if key.endswith("_table"):
            try:
                kw[key] = TableFunction(value)
            except (TypeError, ValueError) as exc:
                raise ScenarioError(full, str(exc)) from None
        elif key == "pressure_clamp":
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ScenarioError(full, "expected [low, high]")
            kw[key] = (_number(value[0], full), _number(value[1], full))
        else:
            kw[key] = _number(value, full)
    try:
        return PolicyParams(**kw)
    except ValueError as exc:
        raise ScenarioError("policy", str(exc)) from None


def policy_to_dict(policy: PolicyParams) -> dict:
    out = {}
    for f in fields(policy):
        v = getattr(policy, f.name)
        out[f.name] = [list(p) for p in v.points] if isinstance(v, TableFunction) else (
            list(v) if isinstance(v, tuple) else v
        )
    return out


def _load_project(data: Any, base: Path) -> tuple[ProjectParameters, Calibration | None]:
    if not isinstance(data, dict):
        raise ScenarioError("project", "expected an object")
    _reject_unknown(data, {"metrics", "parameters"}, "project")
    if ("metrics" in data) == ("parameters" in data):
        raise ScenarioError("project", "give exactly one of 'metrics' or 'parameters'")
    if "metrics" in data:
        raw = _read_json(base / data["metrics"], "project.metrics")
        try:
            cal = calibrate(ProjectMetrics.from_dict(raw))
        except ValueError as exc:
            raise ScenarioError("project.metrics", str(exc)) from None
        return cal.parameters, cal
    raw = data["parameters"]
    if isinstance(raw, str):
        raw = _read_json(base / raw, "project.parameters")
        raw = raw.get("parameters", raw)
    if not isinstance(raw, dict):
        raise ScenarioError("project.parameters", "expected an object or a path")
    names = {f.name for f in fields(ProjectParameters)}
    _reject_unknown(raw, names, "project.parameters")
    try:
        return ProjectParameters(**{k: _number(v, f"project.parameters.{k}") for k, v in raw.items()}), None
    except TypeError as exc:
        raise ScenarioError("project.parameters", str(exc)) from None
    except ValueError as exc:
        raise ScenarioError("project.parameters", str(exc)) from None


def _load_volatility(data: Any, base: Path) -> TableVolatility | vol.VolatilityPattern:
    if not isinstance(data, dict) or "mode" not in data:
        raise ScenarioError("volatility.mode", "expected 'table' or 'pattern'")
    mode = data["mode"]
    if mode == "table":
        _reject_unknown(data, {"mode", "path", "total_loc"}, "volatility")
        for key in ("path", "total_loc"):
            if key not in data:
                raise ScenarioError(f"volatility.{key}", "missing required key")
        path = base / data["path"]
        if not path.exists():
            raise ScenarioError("volatility.path", f"file not found: {path}")
        total = _number(data["total_loc"], "volatility.total_loc")
        if total < 0 or total != int(total):
            raise ScenarioError("volatility.total_loc", "expected a non-negative integer")
        return TableVolatility(path, int(total))
    if mode == "pattern":
        allowed = {"mode", "shape", "total_loc", "window_start", "window_end", "steepness"}
        _reject_unknown(data, allowed, "volatility")
        for key in ("shape", "total_loc", "window_start", "window_end"):
            if key not in data:
                raise ScenarioError(f"volatility.{key}", "missing required key")
        if data["shape"] not in vol.SHAPES:
            raise ScenarioError(
                "volatility.shape", f"unknown shape {data['shape']!r}; allowed: {', '.join(vol.SHAPES)}"
            )
        kw = {k: _number(v, f"volatility.{k}") for k, v in data.items() if k not in ("mode", "shape")}
        try:
            return vol.VolatilityPattern(shape=data["shape"], **kw)
        except ValueError as exc:
            raise ScenarioError("volatility", str(exc)) from None
    raise ScenarioError("volatility.mode", f"unknown mode {mode!r}; expected 'table' or 'pattern'")


def _load_sim(data: Any) -> SimConfig:
    if not isinstance(data, dict):
        raise ScenarioError("sim", "expected an object")
    _reject_unknown(data, {"t_start", "t_end", "dt"}, "sim")
    if "t_end" not in data:
        raise ScenarioError("sim.t_end", "missing required key")
    kw = {k: _number(v, f"sim.{k}") for k, v in data.items()}
    try:
        return SimConfig(**kw)
    except ValueError as exc:
        raise ScenarioError("sim", str(exc)) from None


def scenario_from_dict(data: dict, base: Path | str = ".") -> Scenario:
    base = Path(base)
    if not isinstance(data, dict):
        raise ScenarioError("scenario", "expected a JSON object")
    _reject_unknown(data, _TOP_KEYS, "")
    for key in _REQUIRED:
        if key not in data:
            raise ScenarioError(key, "missing required key")
    params, cal = _load_project(data["project"], base)
    try:
        start = date.fromisoformat(data["project_start_date"])
    except (TypeError, ValueError):
        raise ScenarioError("project_start_date", "expected YYYY-MM-DD") from None
    notes = data.get("notes", [])
    if isinstance(notes, str):
        notes = [notes]
    return Scenario(
        params=params,
        policy=policy_from_dict(data.get("policy")),
        volatility=_load_volatility(data["volatility"], base),
        sim=_load_sim(data["sim"]),
        project_start_date=start,
        model_prefix_days=_number(data.get("model_prefix_days", vol.DEFAULT_PREFIX_DAYS), "model_prefix_days"),
        calibration=cal,
        notes=list(notes),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    data = _read_json(path, "scenario")
    sc = scenario_from_dict(data, path.parent)
    sc.source = path
    return sc


# -- summaries and serialization ---------------------------------------------------


@dataclass
class SummaryReport:
    completed: bool
    completion_day: float | None
    final_day: float
    effort_breakdown: dict[str, float]
    errors_generated: float
    errors_fixed: float
    schedule_overrun_pct: float
    effort_overrun_pct: float
    final_tasks: float
    final_loc: float
    injected_tasks: float
    schedule_estimate: float
    effort_estimate: float

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float):
                return round_sig(v)
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            return v

        return {k: clean(v) for k, v in asdict(self).items()}


def summarize(run: ProjectRun) -> SummaryReport:
    s = run.series
    end = run.completion_day if run.completed else float(s.time[-1])
    breakdown = run.effort_breakdown.as_dict()
    p = run.params
    return SummaryReport(
        completed=run.completed,
        completion_day=run.completion_day,
        final_day=float(s.time[-1]),
        effort_breakdown=breakdown,
        errors_generated=run.cumulative_errors,
        errors_fixed=run.final_state.errors_fixed,
        schedule_overrun_pct=(end - p.schedule_estimate) / p.schedule_estimate * 100,
        effort_overrun_pct=(breakdown["total"] - p.effort_estimate) / p.effort_estimate * 100,
        final_tasks=run.final_tasks,
        final_loc=run.final_loc,
        injected_tasks=run.final_tasks - p.initial_size_tasks,
        schedule_estimate=p.schedule_estimate,
        effort_estimate=p.effort_estimate,
    )


def timeseries_csv(run: ProjectRun) -> str:
    s = run.series
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMESERIES_COLUMNS)
    cols = [s.time] + [s[c] for c in RECORDED_CHANNELS]
    for row in zip(*cols):
        w.writerow([fmt_number(float(v)) for v in row])
    return buf.getvalue()


def write_outputs(run: ProjectRun, out_dir) -> SummaryReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(run)
    (out / "timeseries.csv").write_text(timeseries_csv(run), encoding="utf-8")
    (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
    return summary


def read_csv_columns(path, *, sparse: bool = False) -> dict[str, np.ndarray]:
    return parse_csv_columns(Path(path).read_text(encoding="utf-8"), sparse=sparse)


def parse_csv_columns(text: str, *, sparse: bool = False) -> dict[str, np.ndarray]:
    """Parse a numeric CSV into columns; empty cells become NaN when ``sparse``."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CompareError("empty CSV")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "day":
        raise CompareError("first column must be 'day'")
    cols: dict[str, list[float]] = {h: [] for h in header}
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CompareError(f"row {r}: expected {len(header)} cells, got {len(row)}")
        for h, cell in zip(header, row):
            cell = cell.strip()
            if cell == "" and sparse and h != "day":
                cols[h].append(math.nan)
                continue
            try:
                cols[h].append(float(cell))
            except ValueError:
                raise CompareError(f"row {r}, column {h!r}: non-numeric cell {cell!r}") from None
    return {h: np.array(v) for h, v in cols.items()}


# -- comparison -----------------------------------------------------------------------


@dataclass
class ChannelComparison:
    mape: float | None
    final_delta_pct: float | None
    matched: int


@dataclass
class ComparisonReport:
    channels: dict[str, ChannelComparison]

    def to_dict(self) -> dict:
        return {
            name: {
                "mape_pct": None if c.mape is None else round_sig(c.mape),
                "final_delta_pct": None if c.final_delta_pct is None else round_sig(c.final_delta_pct),
                "matched": c.matched,
            }
            for name, c in self.channels.items()
        }


def _with_derived(sim: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = dict(sim)
    buckets = [f"effort_{b}" for b in EFFORT_BUCKETS]
    if "effort_total" not in out and all(b in out for b in buckets):
        out["effort_total"] = sum(out[b] for b in buckets)
    return out


def compare(sim: dict[str, np.ndarray], actual: dict[str, np.ndarray]) -> ComparisonReport:
    """Score a simulation against sparse actual samples.

    The simulation is linearly interpolated to each actual sample time inside
    its own time range. MAPE skips zero actuals. The final delta compares the
    last simulated value with the last actual sample.
    """
    sim = _with_derived(sim)
    shared = [c for c in actual if c != "day" and c in sim]
    if not shared:
        raise CompareError("no channels shared between simulation and actuals")
    sim_day = sim["day"]
    out = {}
    for name in shared:
        a_day, a_val = actual["day"], actual[name]
        keep = ~np.isnan(a_val)
        a_day, a_val = a_day[keep], a_val[keep]
        inside = (a_day >= sim_day[0]) & (a_day <= sim_day[-1])
        errs = []
        for d, v in zip(a_day[inside], a_val[inside]):
            if v != 0:
                errs.append(abs(np.interp(d, sim_day, sim[name]) - v) / abs(v))
        mape = float(np.mean(errs) * 100) if errs else None
        final = None
        if len(a_val) and a_val[-1] != 0:
            final = float((sim[name][-1] - a_val[-1]) / abs(a_val[-1]) * 100)
        out[name] = ChannelComparison(mape, final, len(errs))
    return ComparisonReport(out)


def compare_files(sim_csv, actual_csv) -> ComparisonReport:
    return compare(read_csv_columns(sim_csv), read_csv_columns(actual_csv, sparse=True))


# -- pattern sweep ----------------------------------------------------------------------


@dataclass
class SweepRow:
    pattern: str
    injected_tasks: float
    total_effort: float
    completion_day: float | None
    total_errors: float

    @property
    def completed(self) -> bool:
        return self.completion_day is not None


def sweep(scenario: Scenario, volume_loc: float, window: tuple[float, float]) -> list[SweepRow]:
    """Run every canonical pattern at the same volume and window."""
    rows = []
    for shape in vol.SHAPES:
        pattern = vol.VolatilityPattern(shape, volume_loc, window[0], window[1])
        series = vol.pattern_rate_series(pattern, scenario.params.loc_per_task, scenario.sim)
        run = run_project(scenario.params, scenario.policy, series, scenario.sim)
        rows.append(SweepRow(
            pattern=shape,
            injected_tasks=vol.total_injected(series),
            total_effort=run.effort_breakdown.total,
            completion_day=run.completion_day,
            total_errors=run.cumulative_errors,
        ))
    return rows


def sweep_ranking(rows: list[SweepRow]) -> list[str]:
    """Patterns ordered by total effort, largest first."""
    return [r.pattern for r in sorted(rows, key=lambda r: (-r.total_effort, r.pattern))]


def effort_spread_pct(rows: list[SweepRow]) -> float:
    efforts = [r.total_effort for r in rows]
    return (max(efforts) - min(efforts)) / min(efforts) * 100


def write_sweep(rows: list[SweepRow], out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pattern", "injected_tasks", "total_effort", "completion_day", "total_errors"])
    for r in rows:
        w.writerow([
            r.pattern,
            fmt_number(r.injected_tasks),
            fmt_number(r.total_effort),
            "" if r.completion_day is None else fmt_number(r.completion_day),
            fmt_number(r.total_errors),
        ])
    (out / "sweep.csv").write_text(buf.getvalue(), encoding="utf-8")
    report = {
        "ranking_by_total_effort": sweep_ranking(rows),
        "max_pairwise_effort_spread_pct": round_sig(effort_spread_pct(rows)),
        "all_completed": all(r.completed for r in rows),
    }
    (out / "sweep.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
