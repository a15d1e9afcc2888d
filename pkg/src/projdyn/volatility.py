"""Change-order generation streams in tasks per working day.

Two sources: empirical change-request tables (one CSV row per request,
month-granular dates) and canonical synthetic patterns. Both are sampled onto
the simulation grid cell by cell, where the sample at ``t_k`` stands for the
interval ``[t_k, t_k + dt)``, so the rectangle-rule integral of a series is
exactly the injected volume.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .engine import SimConfig

CR_HEADER = (
    "id",
    "priority",
    "change_type",
    "status",
    "start_month",
    "end_month",
    "effort_man_days",
)
PRIORITIES = ("urgent", "desirable")
CHANGE_TYPES = ("add", "modify", "query", "report", "impact-analysis")
STATUSES = ("completed", "open")
SHAPES = ("uniform", "exp-rise", "exp-decay", "triangular")

DEFAULT_PREFIX_DAYS = 25


class VolatilityError(ValueError):
    pass


class CRParseError(VolatilityError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


@dataclass(frozen=True)
class ChangeRequest:
    id: int
    priority: str
    change_type: str
    status: str
    start_month: date
    end_month: date
    effort: float

    def __post_init__(self):
        if self.end_month < self.start_month:
            raise VolatilityError(f"CR {self.id}: end month precedes start month")
        if not self.effort > 0:
            raise VolatilityError(f"CR {self.id}: effort must be positive")


@dataclass(frozen=True)
class VolatilityPattern:
    shape: str
    total_loc: float
    window_start: float
    window_end: float
    steepness: float = 10.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise VolatilityError(f"unknown pattern shape {self.shape!r}; allowed: {', '.join(SHAPES)}")
        if not self.window_end > self.window_start:
            raise VolatilityError("window_end must exceed window_start")
        if self.total_loc < 0:
            raise VolatilityError("total_loc must be non-negative")
        if not self.steepness > 1:
            raise VolatilityError("steepness must exceed 1")


@dataclass
class VolatilitySeries:
    rates: np.ndarray
    dt: float
    t_start: float = 0.0

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=float)
        if np.any(self.rates < 0):
            raise VolatilityError("change-order rates must be non-negative")

    @property
    def time(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(len(self.rates))

    def __len__(self) -> int:
        return len(self.rates)

    def scaled(self, factor: float) -> "VolatilitySeries":
        return VolatilitySeries(self.rates * factor, self.dt, self.t_start)


def zero_series(grid: SimConfig) -> VolatilitySeries:
    return VolatilitySeries(np.zeros(grid.n_steps + 1), grid.dt, grid.t_start)


def total_injected(series: VolatilitySeries) -> float:
    """Injected task volume (rectangle rule)."""
    return float(np.sum(series.rates) * series.dt)


# -- change-request tables -----------------------------------------------------


def _parse_month(token: str, row: int, column: str) -> date:
    try:
        year, month = token.strip().split("-")
        return date(int(year), int(month), 1)
    except ValueError:
        raise CRParseError(f"{column} {token!r} is not YYYY-MM", row) from None


def _parse_token(token: str, allowed: Sequence[str], row: int, column: str) -> str:
    value = token.strip()
    if value not in allowed:
        raise CRParseError(f"unknown {column} {value!r} (allowed: {', '.join(allowed)})", row)
    return value


def parse_cr_csv(text: str) -> list[ChangeRequest]:
    """Parse change requests; row numbers in errors count the header as row 1."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CRParseError("empty file") from None
    if tuple(h.strip() for h in header) != CR_HEADER:
        raise CRParseError(f"header must be {','.join(CR_HEADER)}", 1)
    out = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CR_HEADER):
            raise CRParseError(f"expected {len(CR_HEADER)} fields, got {len(row)}", row_no)
        rec = dict(zip(CR_HEADER, row))
        try:
            cr_id = int(rec["id"])
            effort = float(rec["effort_man_days"])
        except ValueError as exc:
            raise CRParseError(str(exc), row_no) from None
        if cr_id <= 0:
            raise CRParseError("id must be a positive integer", row_no)
        if not (math.isfinite(effort) and effort > 0):
            raise CRParseError(f"effort must be positive, got {effort}", row_no)
        start = _parse_month(rec["start_month"], row_no, "start_month")
        end = _parse_month(rec["end_month"], row_no, "end_month")
        if end < start:
            raise CRParseError("end_month precedes start_month", row_no)
        out.append(
            ChangeRequest(
                id=cr_id,
                priority=_parse_token(rec["priority"], PRIORITIES, row_no, "priority"),
                change_type=_parse_token(rec["change_type"], CHANGE_TYPES, row_no, "change_type"),
                status=_parse_token(rec["status"], STATUSES, row_no, "status"),
                start_month=start,
                end_month=end,
                effort=effort,
            )
        )
    return out


def load_cr_csv(path) -> list[ChangeRequest]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_cr_csv(fh.read())


def month_to_working_day(month: date, project_start: date) -> int:
    """Working days from project start to the first day of ``month`` (5/7 rule)."""
    first = date(month.year, month.month, 1)
    if first < project_start:
        raise VolatilityError(f"{first:%Y-%m} begins before the project start {project_start}")
    return math.floor((first - project_start).days * 5 / 7)


def _next_month(d: date) -> date:
    return date(d.year + d.month // 12, d.month % 12 + 1, 1)


def cr_loc_allocation(crs: Sequence[ChangeRequest], total_loc: int) -> list[int]:
    """Split ``total_loc`` across requests in proportion to effort.

    Shares are floored and the leftover units go to the largest remainders
    (ties to the earlier request), so the parts sum to ``total_loc`` exactly.
    """
    # exact rationals so equal remainders really tie
    efforts = [Fraction(cr.effort) for cr in crs]
    total_effort = sum(efforts)
    if not total_effort > 0:
        raise VolatilityError("total change-request effort must be positive")
    total_loc = int(total_loc)
    exact = [total_loc * e / total_effort for e in efforts]
    parts = [math.floor(x) for x in exact]
    leftover = total_loc - sum(parts)
    order = sorted(range(len(crs)), key=lambda i: (-(exact[i] - parts[i]), i))
    for i in order[:leftover]:
        parts[i] += 1
    return parts


def cr_window(cr: ChangeRequest, project_start: date, model_prefix_days: float) -> tuple[float, float]:
    """Active interval of a request in model time."""
    start = month_to_working_day(cr.start_month, project_start)
    end = month_to_working_day(cr.end_month, project_start)
    if end == start:
        # a request opened and closed within one month occupies that month
        end = month_to_working_day(_next_month(cr.start_month), project_start)
    return start - model_prefix_days, end - model_prefix_days


def _deposit(rates: np.ndarray, grid: SimConfig, a: float, b: float, fn: Callable[[float], float]) -> None:
    """Add ``fn`` over ``[a, b)`` to the cells it overlaps, overlap-weighted.

    Each overlap is represented by ``fn`` at its midpoint.
    """
    dt = grid.dt
    k0 = max(0, int(math.floor((a - grid.t_start) / dt)))
    k1 = min(len(rates) - 1, int(math.ceil((b - grid.t_start) / dt)))
    for k in range(k0, k1 + 1):
        lo = max(a, grid.time(k))
        hi = min(b, grid.time(k) + dt)
        if hi > lo:
            rates[k] += fn(0.5 * (lo + hi)) * (hi - lo) / dt


def cr_rate_series(
    crs: Sequence[ChangeRequest],
    loc_per_task: float,
    project_start: date,
    model_prefix_days: float,
    grid: SimConfig,
    total_loc: int,
) -> VolatilitySeries:
    """Spread each request's LOC share uniformly over its active interval.

    A window that starts before ``grid.t_start`` is truncated there with its
    full volume kept; a window entirely before it, or running past
    ``grid.t_end``, is an error.
    """
    if not loc_per_task > 0:
        raise VolatilityError("loc_per_task must be positive")
    rates = np.zeros(grid.n_steps + 1)
    if not crs:
        return VolatilitySeries(rates, grid.dt, grid.t_start)
    for cr, loc in zip(crs, cr_loc_allocation(crs, total_loc)):
        a, b = cr_window(cr, project_start, model_prefix_days)
        if b <= grid.t_start:
            raise VolatilityError(f"CR {cr.id} window [{a}, {b}) lies before the simulation start")
        if b > grid.t_end:
            raise VolatilityError(f"CR {cr.id} window [{a}, {b}) runs past the simulation end {grid.t_end}")
        a = max(a, grid.t_start)
        rate = loc / loc_per_task / (b - a)
        _deposit(rates, grid, a, b, lambda _t, r=rate: r)
    return VolatilitySeries(rates, grid.dt, grid.t_start)


# -- canonical patterns ----------------------------------------------------------


def pattern_shape(pattern: VolatilityPattern, loc_per_task: float) -> Callable[[float], float]:
    """Analytic rate (tasks/day) of a pattern, zero outside its window."""
    a, b = pattern.window_start, pattern.window_end
    T = b - a
    V = pattern.total_loc / loc_per_task
    lam = math.log(pattern.steepness) / T
    norm = lam * V / (1.0 - math.exp(-lam * T))

    def decay(t: float) -> float:
        return norm * math.exp(-lam * (t - a))

    def fn(t: float) -> float:
        if not a <= t <= b:
            return 0.0
        if pattern.shape == "uniform":
            return V / T
        if pattern.shape == "triangular":
            return 2 * V / T * (1.0 - abs(t - (a + b) / 2) / (T / 2))
        if pattern.shape == "exp-decay":
            return decay(t)
        return decay(a + b - t)

    return fn


def pattern_rate_series(
    pattern: VolatilityPattern, loc_per_task: float, grid: SimConfig
) -> VolatilitySeries:
    if not loc_per_task > 0:
        raise VolatilityError("loc_per_task must be positive")
    if pattern.window_start < grid.t_start or pattern.window_end > grid.t_end:
        raise VolatilityError(
            f"pattern window [{pattern.window_start}, {pattern.window_end}] "
            f"lies outside the grid [{grid.t_start}, {grid.t_end}]"
        )
    rates = np.zeros(grid.n_steps + 1)
    volume = pattern.total_loc / loc_per_task
    if volume > 0:
        _deposit(rates, grid, pattern.window_start, pattern.window_end, pattern_shape(pattern, loc_per_task))
        rates *= volume / (rates.sum() * grid.dt)
    return VolatilitySeries(rates, grid.dt, grid.t_start)
