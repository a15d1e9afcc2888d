"""Waterfall software-project dynamics model.

Four coupled sectors run on :mod:`projdyn.engine`:

* human resources: hiring through a third-order pipeline, rookie
  assimilation, rookies-first release;
* productivity: nominal potential productivity scaled by motivation,
  communication losses, complexity, user involvement, learning, schedule
  pressure and experience mix;
* production: development, QA and rework, with testing picking up staff the
  remaining backlog cannot use and taking everyone once development ends;
  an error ledger tracks generated -> undetected -> detected/escaped -> fixed;
* planning and control: perceived remaining effort drives the desired
  workforce and a slip-only scheduled completion date.

Time is in working days, effort in person-days (one person present for one
working day), size in tasks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping

import numpy as np

from .engine import (
    DEFAULT_DT,
    Delay3State,
    SimConfig,
    SmoothState,
    TableFunction,
    TimeSeries,
    delay3_rates,
    simulate,
    smooth_rate,
)

TASK_TOL = 1e-6
ERROR_TOL = 1e-6
EFFORT_BUCKETS = ("dev", "qa", "rework", "training", "testing")


@dataclass(frozen=True)
class ProjectParameters:
    initial_size_loc: float
    loc_per_task: float
    effort_estimate: float
    schedule_estimate: float
    nominal_potential_productivity: float
    nominal_fraction_manday: float
    complexity_multiplier: float
    user_involvement_multiplier: float
    initial_workforce: float
    initial_experienced_fraction: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be a positive number, got {v!r}")
        for name in ("nominal_fraction_manday", "initial_experienced_fraction"):
            if getattr(self, name) > 1:
                raise ValueError(f"{name} must be in (0, 1]")

    @property
    def initial_size_tasks(self) -> float:
        return self.initial_size_loc / self.loc_per_task

    @property
    def planned_productivity(self) -> float:
        """Tasks per person-day implied by the initial estimate."""
        return self.initial_size_tasks / self.effort_estimate


def _table(points):
    return field(default_factory=lambda: TableFunction(points))


@dataclass(frozen=True)
class PolicyParams:
    hiring_delay: float = 15.0
    release_delay: float = 10.0
    assimilation_delay: float = 20.0
    rookie_relative_productivity: float = 0.5
    trainer_fraction_per_rookie: float = 0.2
    qa_headcount_fraction: float = 0.15
    comm_loss_coefficient: float = 0.0015
    comm_loss_cap: float = 0.5
    errors_per_task_nominal: float = 1.0
    qa_detection_efficiency: float = 0.8
    qa_detection_delay: float = 10.0
    rework_cost_per_error: float = 0.05
    test_correction_per_escaped_error: float = 0.3
    planned_testing_fraction: float = 0.30
    schedule_adjust_delay: float = 5.0
    productivity_perception_delay: float = 10.0
    max_hires_per_experienced: float = 1.0
    pressure_clamp: tuple[float, float] = (-0.5, 1.5)
    learning_table: TableFunction = _table([(0, 0.9), (0.5, 1.0), (1, 1.25)])
    pressure_productivity_table: TableFunction = _table(
        [(-0.5, 0.95), (0, 1.0), (1, 1.15), (1.5, 1.2)]
    )
    pressure_error_table: TableFunction = _table(
        [(-0.5, 0.95), (0, 1.0), (1, 1.3), (1.5, 1.5)]
    )
    wcwf_table: TableFunction = _table([(0, 0), (1.5, 1)])

    _DELAYS = (
        "hiring_delay",
        "release_delay",
        "assimilation_delay",
        "qa_detection_delay",
        "schedule_adjust_delay",
        "productivity_perception_delay",
    )
    _FRACTIONS = (
        "rookie_relative_productivity",
        "trainer_fraction_per_rookie",
        "qa_headcount_fraction",
        "comm_loss_cap",
        "qa_detection_efficiency",
        "planned_testing_fraction",
    )

    def __post_init__(self):
        for name in self._DELAYS:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in self._FRACTIONS:
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        for name in (
            "comm_loss_coefficient",
            "errors_per_task_nominal",
            "rework_cost_per_error",
            "test_correction_per_escaped_error",
            "max_hires_per_experienced",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        lo, hi = self.pressure_clamp
        if not lo < hi:
            raise ValueError("pressure_clamp must be an increasing pair")
        object.__setattr__(self, "pressure_clamp", (float(lo), float(hi)))


@dataclass(frozen=True)
class ProjectState:
    perceived_size: float
    tasks_developed: float
    tasks_tested: float
    rookies: float
    experienced: float
    errors_undetected: float
    errors_detected: float
    errors_escaped: float
    errors_fixed: float
    effort_dev: float
    effort_qa: float
    effort_rework: float
    effort_training: float
    effort_testing: float
    scheduled_completion: float
    perceived_productivity: SmoothState
    hiring_pipeline: Delay3State
    errors_generated: float = 0.0

    @property
    def workforce(self) -> float:
        return self.rookies + self.experienced

    @property
    def remaining_tasks(self) -> float:
        return max(0.0, self.perceived_size - self.tasks_developed)

    @property
    def development_active(self) -> bool:
        return self.perceived_size - self.tasks_developed > TASK_TOL

    @property
    def total_effort(self) -> float:
        return sum(getattr(self, f"effort_{b}") for b in EFFORT_BUCKETS)

    def as_stocks(self) -> dict[str, float]:
        out = {}
        for f in fields(self):
            if f.name == "perceived_productivity":
                out[f.name] = self.perceived_productivity.level
            elif f.name == "hiring_pipeline":
                for i, v in enumerate(self.hiring_pipeline.levels, 1):
                    out[f"hiring_pipeline_{i}"] = v
            else:
                out[f.name] = getattr(self, f.name)
        return out

    @classmethod
    def from_stocks(cls, stocks: Mapping[str, float], policy: PolicyParams) -> "ProjectState":
        kw = {}
        for f in fields(cls):
            if f.name == "perceived_productivity":
                kw[f.name] = SmoothState(stocks[f.name], policy.productivity_perception_delay)
            elif f.name == "hiring_pipeline":
                levels = tuple(stocks[f"hiring_pipeline_{i}"] for i in (1, 2, 3))
                kw[f.name] = Delay3State(levels, policy.hiring_delay)
            else:
                kw[f.name] = stocks[f.name]
        return cls(**kw)


NONNEGATIVE_STOCKS = tuple(
    name
    for name in ProjectState(
        *([0.0] * 15), SmoothState(1.0, 1.0), Delay3State.empty(1.0)
    ).as_stocks()
    if name != "scheduled_completion"
)


@dataclass(frozen=True)
class Allocation:
    dev: float = 0.0
    qa: float = 0.0
    rework: float = 0.0
    training: float = 0.0
    testing: float = 0.0

    @property
    def total(self) -> float:
        return self.dev + self.qa + self.rework + self.training + self.testing


@dataclass(frozen=True)
class ErrorFlows:
    detection: float = 0.0
    rework_fix: float = 0.0
    escape: float = 0.0
    test_fix: float = 0.0


@dataclass(frozen=True)
class WorkforceFlows:
    hiring: float = 0.0
    release: float = 0.0
    assimilation: float = 0.0
    release_rookies: float = 0.0
    release_experienced: float = 0.0


@dataclass
class EffortBreakdown:
    dev: float
    qa: float
    rework: float
    training: float
    testing: float

    @property
    def total(self) -> float:
        return self.dev + self.qa + self.rework + self.training + self.testing

    def as_dict(self) -> dict[str, float]:
        d = {b: getattr(self, b) for b in EFFORT_BUCKETS}
        d["total"] = self.total
        return d


@dataclass
class ProjectRun:
    series: TimeSeries
    completion_day: float | None
    effort_breakdown: EffortBreakdown
    final_tasks: float
    final_loc: float
    cumulative_errors: float
    params: ProjectParameters
    policy: PolicyParams
    final_state: ProjectState

    @property
    def completed(self) -> bool:
        return self.completion_day is not None


# -- sector equations ---------------------------------------------------------


def init_state(params: ProjectParameters, policy: PolicyParams | None = None) -> ProjectState:
    policy = policy or PolicyParams()
    n = params.initial_workforce
    experienced = n * params.initial_experienced_fraction
    return ProjectState(
        perceived_size=params.initial_size_tasks,
        tasks_developed=0.0,
        tasks_tested=0.0,
        rookies=n - experienced,
        experienced=experienced,
        errors_undetected=0.0,
        errors_detected=0.0,
        errors_escaped=0.0,
        errors_fixed=0.0,
        effort_dev=0.0,
        effort_qa=0.0,
        effort_rework=0.0,
        effort_training=0.0,
        effort_testing=0.0,
        scheduled_completion=params.schedule_estimate,
        perceived_productivity=SmoothState(
            params.planned_productivity, policy.productivity_perception_delay
        ),
        hiring_pipeline=Delay3State.empty(policy.hiring_delay),
    )


def communication_loss(n: float, policy: PolicyParams) -> float:
    """Fraction of the working day lost to team communication overhead."""
    if n <= 1:
        return 0.0
    return min(policy.comm_loss_cap, policy.comm_loss_coefficient * n * (n - 1))


def experience_mix_multiplier(rookies: float, experienced: float, policy: PolicyParams) -> float:
    total = rookies + experienced
    if total <= 0:
        return 1.0
    rho = policy.rookie_relative_productivity
    return (experienced + rho * rookies) / total


def learning_multiplier(completion_fraction: float, policy: PolicyParams) -> float:
    return policy.learning_table(min(1.0, max(0.0, completion_fraction)))


def testing_productivity(params: ProjectParameters, policy: PolicyParams) -> float:
    """Planned testing throughput in tasks per person-day, fixed at plan time."""
    planned = policy.planned_testing_fraction * params.effort_estimate
    if planned <= 0:
        return math.inf
    return params.initial_size_tasks / planned


def perceived_effort_remaining(
    state: ProjectState, params: ProjectParameters, policy: PolicyParams
) -> float:
    """Total effort perceived still needed (person-days).

    Undeveloped tasks at the perceived all-in productivity (which already
    carries their testing share), plus testing of developed but untested
    tasks at the planned testing rate, plus correction of escaped errors.
    """
    dev = state.remaining_tasks / max(state.perceived_productivity.level, 1e-9)
    untested = max(0.0, state.tasks_developed - state.tasks_tested)
    test = untested / testing_productivity(params, policy)
    fix = state.errors_escaped * policy.test_correction_per_escaped_error
    return dev + test + fix


def schedule_pressure(
    state: ProjectState, params: ProjectParameters, policy: PolicyParams, t: float
) -> float:
    """Normalized gap between effort still needed and effort obtainable."""
    needed = perceived_effort_remaining(state, params, policy)
    obtainable = state.workforce * max(0.0, state.scheduled_completion - t)
    sp = (needed - obtainable) / max(obtainable, 1.0)
    lo, hi = policy.pressure_clamp
    return min(hi, max(lo, sp))


def pressure_multipliers(sp: float, policy: PolicyParams) -> tuple[float, float]:
    return policy.pressure_productivity_table(sp), policy.pressure_error_table(sp)


def actual_productivity(
    params: ProjectParameters, state: ProjectState, policy: PolicyParams, sp: float
) -> float:
    """Development productivity in LOC per person-day."""
    frac = state.tasks_developed / state.perceived_size if state.perceived_size > 0 else 1.0
    return (
        params.nominal_potential_productivity
        * params.nominal_fraction_manday
        * (1.0 - communication_loss(state.workforce, policy))
        * params.complexity_multiplier
        * params.user_involvement_multiplier
        * learning_multiplier(frac, policy)
        * pressure_multipliers(sp, policy)[0]
        * experience_mix_multiplier(state.rookies, state.experienced, policy)
    )


def allocate_headcount(
    state: ProjectState,
    params: ProjectParameters,
    policy: PolicyParams,
    t: float,
    dt: float = DEFAULT_DT,
    productivity: float | None = None,
) -> Allocation:
    """Split the workforce into the five effort buckets.

    Trainers come off the top. While development is active QA takes its
    fraction, rework takes what the detected backlog needs and developers get
    the rest, except that when ``productivity`` (LOC/person-day) shows the
    remaining backlog needs fewer developers than available, the surplus
    tests already-developed tasks. After development completes everyone but
    the trainers tests, after clearing any detected-error backlog.
    """
    n = state.workforce
    if n <= 0:
        return Allocation()
    training = min(state.experienced, policy.trainer_fraction_per_rookie * state.rookies)
    rest = n - training
    if state.development_active:
        qa_frac = policy.qa_headcount_fraction
        qa = qa_frac * rest
        needed = (
            state.errors_detected * policy.rework_cost_per_error / policy.qa_detection_delay
        )
        rework = min(rest - qa, needed)
        dev = rest - qa - rework
        untested = state.tasks_developed - state.tasks_tested
        if productivity and productivity > 0 and untested > TASK_TOL and qa_frac < 1:
            dev_needed = state.remaining_tasks / dt / (productivity / params.loc_per_task)
            if dev_needed < dev:
                dev = dev_needed
                qa = dev * qa_frac / (1.0 - qa_frac)
                return Allocation(
                    dev=dev, qa=qa, rework=rework, training=training,
                    testing=rest - dev - qa - rework,
                )
        return Allocation(dev=dev, qa=qa, rework=rework, training=training)
    rework = min(rest, state.errors_detected * policy.rework_cost_per_error / dt)
    return Allocation(rework=rework, training=training, testing=rest - rework)


def software_development_rate(
    state: ProjectState,
    params: ProjectParameters,
    policy: PolicyParams,
    sp: float,
    alloc: Allocation,
    dt: float = DEFAULT_DT,
) -> float:
    if alloc.dev <= 0 or not state.development_active:
        return 0.0
    rate = alloc.dev * actual_productivity(params, state, policy, sp) / params.loc_per_task
    return min(rate, state.remaining_tasks / dt)


def error_generation_rate(
    dev_rate: float, state: ProjectState, policy: PolicyParams, sp: float
) -> float:
    mix = experience_mix_multiplier(state.rookies, state.experienced, policy)
    return (
        dev_rate
        * policy.errors_per_task_nominal
        * pressure_multipliers(sp, policy)[1]
        * (2.0 - mix)
    )


def _testing_split(
    state: ProjectState, params: ProjectParameters, policy: PolicyParams
) -> float:
    """Share of testing headcount spent correcting escaped errors.

    Testing and correction are worked off in proportion to their remaining
    effort so both finish together.
    """
    fix = state.errors_escaped * policy.test_correction_per_escaped_error
    test = max(0.0, state.tasks_developed - state.tasks_tested) / testing_productivity(
        params, policy
    )
    if fix + test <= 0:
        return 0.0
    return fix / (fix + test)


def error_flows(
    state: ProjectState,
    policy: PolicyParams,
    alloc: Allocation,
    params: ProjectParameters | None = None,
    dt: float = DEFAULT_DT,
) -> ErrorFlows:
    if state.development_active:
        detection = policy.qa_detection_efficiency * state.errors_undetected / policy.qa_detection_delay
        detection = min(detection, state.errors_undetected / dt)
        escape = 0.0
    else:
        # whatever QA missed is handed to testing when development completes
        detection = 0.0
        escape = state.errors_undetected / dt
    test_fix = 0.0
    c = policy.test_correction_per_escaped_error
    if alloc.testing > 0 and state.errors_escaped > 0:
        if c <= 0:
            test_fix = state.errors_escaped / dt
        else:
            share = _testing_split(state, params, policy) if params is not None else 1.0
            test_fix = min(share * alloc.testing / c, state.errors_escaped / dt)
    if policy.rework_cost_per_error <= 0:
        rework_fix = state.errors_detected / dt
    else:
        rework_fix = min(alloc.rework / policy.rework_cost_per_error, state.errors_detected / dt)
    return ErrorFlows(detection, rework_fix, escape, test_fix)


def testing_rate(
    state: ProjectState,
    params: ProjectParameters,
    policy: PolicyParams,
    alloc: Allocation,
    dt: float = DEFAULT_DT,
) -> float:
    """Tasks per day passing test."""
    if alloc.testing <= 0:
        return 0.0
    untested = max(0.0, state.tasks_developed - state.tasks_tested)
    share = _testing_split(state, params, policy)
    rate = (1.0 - share) * alloc.testing * testing_productivity(params, policy)
    return min(rate, untested / dt)


def desired_workforce(
    state: ProjectState,
    params: ProjectParameters,
    policy: PolicyParams,
    t: float,
) -> float:
    """Workforce level sought.

    Increases are weighted by the willingness to change the workforce, which
    fades as the scheduled completion approaches; reductions are not.
    """
    time_left = state.scheduled_completion - t
    indicated = perceived_effort_remaining(state, params, policy) / max(1.0, time_left)
    n = state.workforce
    if indicated <= n:
        return indicated
    w = policy.wcwf_table(time_left / policy.assimilation_delay)
    return w * indicated + (1.0 - w) * n


def workforce_flows(
    state: ProjectState, target: float, policy: PolicyParams, dt: float = DEFAULT_DT
) -> WorkforceFlows:
    n = state.workforce
    pipeline = state.hiring_pipeline.content
    # staff already in the hiring pipeline count toward closing the gap
    gap = target - n - pipeline
    # newcomers are capped by how many the experienced staff can absorb
    room = policy.max_hires_per_experienced * state.experienced - state.rookies - pipeline
    hiring = max(0.0, min(gap, room)) / policy.hiring_delay
    release = max(0.0, n - target) / policy.release_delay
    assimilation = state.rookies / policy.assimilation_delay
    from_rookies = min(release, max(0.0, state.rookies / dt - assimilation))
    from_experienced = min(release - from_rookies, state.experienced / dt)
    return WorkforceFlows(
        hiring=hiring,
        release=from_rookies + from_experienced,
        assimilation=assimilation,
        release_rookies=from_rookies,
        release_experienced=from_experienced,
    )


def forecast_completion(
    state: ProjectState,
    params: ProjectParameters,
    policy: PolicyParams,
    t: float,
    workforce: float | None = None,
) -> float:
    """Indicated completion day for ``workforce`` staff (default: current).

    Returns the scheduled date unchanged when there is nobody to staff it.
    """
    n = state.workforce if workforce is None else workforce
    if n <= 0:
        return state.scheduled_completion
    return t + perceived_effort_remaining(state, params, policy) / n


def schedule_adjustment_rate(
    state: ProjectState, forecast: float, policy: PolicyParams
) -> float:
    """Slip-only smoothing of the scheduled completion toward the forecast."""
    return max(0.0, forecast - state.scheduled_completion) / policy.schedule_adjust_delay


def derivatives(
    state: ProjectState,
    params: ProjectParameters,
    policy: PolicyParams,
    volatility_rate: float,
    t: float,
    dt: float = DEFAULT_DT,
) -> tuple[dict[str, float], dict[str, float]]:
    """Rates of change of every stock plus the auxiliaries worth recording."""
    sp = schedule_pressure(state, params, policy, t)
    productivity = actual_productivity(params, state, policy, sp)
    alloc = allocate_headcount(state, params, policy, t, dt, productivity)
    dev_rate = software_development_rate(state, params, policy, sp, alloc, dt)
    err_gen = error_generation_rate(dev_rate, state, policy, sp)
    errs = error_flows(state, policy, alloc, params, dt)
    test_rate = testing_rate(state, params, policy, alloc, dt)

    target = desired_workforce(state, params, policy, t)
    wf = workforce_flows(state, target, policy, dt)
    pipe_rates, arrivals = delay3_rates(state.hiring_pipeline.levels, wf.hiring, policy.hiring_delay)

    forecast = forecast_completion(state, params, policy, t, workforce=target)
    sched_rate = schedule_adjustment_rate(state, forecast, policy)

    pp = state.perceived_productivity
    dev_staff = alloc.dev + alloc.qa + alloc.rework
    if state.development_active and dev_staff > 0:
        # capacity, not the clipped rate: a starved team is not a slow team
        observed = alloc.dev * productivity / params.loc_per_task / dev_staff
        # perceived productivity is all-in: charge the planned testing share
        observed *= 1.0 - policy.planned_testing_fraction
    else:
        observed = pp.level

    d = {
        "perceived_size": volatility_rate,
        "tasks_developed": dev_rate,
        "tasks_tested": test_rate,
        "rookies": arrivals - wf.assimilation - wf.release_rookies,
        "experienced": wf.assimilation - wf.release_experienced,
        "errors_undetected": err_gen - errs.detection - errs.escape,
        "errors_detected": errs.detection - errs.rework_fix,
        "errors_escaped": errs.escape - errs.test_fix,
        "errors_fixed": errs.rework_fix + errs.test_fix,
        "errors_generated": err_gen,
        "effort_dev": alloc.dev,
        "effort_qa": alloc.qa,
        "effort_rework": alloc.rework,
        "effort_training": alloc.training,
        "effort_testing": alloc.testing,
        "scheduled_completion": sched_rate,
        "perceived_productivity": smooth_rate(pp.level, observed, pp.delay),
        "hiring_pipeline_1": pipe_rates[0],
        "hiring_pipeline_2": pipe_rates[1],
        "hiring_pipeline_3": pipe_rates[2],
    }
    aux = {
        "change_order_rate": volatility_rate,
        "workforce_total": state.workforce,
        "workforce_rookies": state.rookies,
        "productivity_loc_per_manday": productivity,
        "error_generation_rate": err_gen,
        "errors_cumulative": state.errors_generated,
        "perceived_size_tasks": state.perceived_size,
        "schedule_pressure": sp,
        "hiring_rate": arrivals,
        "hiring_decisions": wf.hiring,
        "release_rate": wf.release,
        "desired_workforce": target,
        "development_rate": dev_rate,
        "testing_rate": test_rate,
        "effort_total": state.total_effort,
    }
    return d, aux


RECORDED_CHANNELS = (
    "change_order_rate",
    "workforce_total",
    "workforce_rookies",
    "productivity_loc_per_manday",
    "scheduled_completion",
    "effort_dev",
    "effort_qa",
    "effort_rework",
    "effort_training",
    "effort_testing",
    "error_generation_rate",
    "errors_cumulative",
    "tasks_developed",
    "tasks_tested",
    "perceived_size_tasks",
)

EXTRA_CHANNELS = (
    "schedule_pressure",
    "hiring_rate",
    "hiring_decisions",
    "release_rate",
    "desired_workforce",
    "development_rate",
    "testing_rate",
    "effort_total",
    "errors_undetected",
    "errors_detected",
    "errors_escaped",
    "errors_fixed",
    "experienced",
    "perceived_productivity",
)


def is_complete(state: ProjectState, volatility_left: float) -> bool:
    return (
        not state.development_active
        and state.perceived_size - state.tasks_tested <= TASK_TOL
        and state.errors_escaped <= ERROR_TOL
        and state.errors_undetected <= ERROR_TOL
        and state.errors_detected <= ERROR_TOL
        and volatility_left <= 0.0
    )


def run_project(
    params: ProjectParameters,
    policy: PolicyParams,
    volatility,
    config: SimConfig,
) -> ProjectRun:
    """Simulate one project until it completes or the horizon runs out.

    ``volatility`` is a :class:`projdyn.volatility.VolatilitySeries` on the
    same grid as ``config`` (or ``None`` for no change orders).
    """
    n = config.n_steps
    if volatility is None:
        rates = np.zeros(n + 1)
    else:
        rates = np.asarray(volatility.rates, dtype=float)
        if len(rates) != n + 1 or abs(volatility.dt - config.dt) > 1e-12:
            raise ValueError("volatility series is not on the simulation grid")
    # volume still to arrive from step k onward
    pending = np.concatenate([np.cumsum(rates[::-1])[::-1], [0.0]])

    def index(t: float) -> int:
        return int(round((t - config.t_start) / config.dt))

    def system(t, stocks):
        state = ProjectState.from_stocks(stocks, policy)
        d, aux = derivatives(state, params, policy, float(rates[index(t)]), t, config.dt)
        for name in EXTRA_CHANNELS:
            if name in stocks:
                aux[name] = stocks[name]
        return d, aux

    def stop(t, stocks, aux):
        state = ProjectState.from_stocks(stocks, policy)
        return is_complete(state, pending[index(t)])

    initial = init_state(params, policy).as_stocks()
    recorded = list(RECORDED_CHANNELS) + [c for c in EXTRA_CHANNELS if c not in RECORDED_CHANNELS]
    series = simulate(
        system, initial, config, recorded, nonnegative=NONNEGATIVE_STOCKS, stop=stop
    )
    last = len(series) - 1
    final = ProjectState.from_stocks(series.final_stocks, policy)
    done = is_complete(final, pending[last])
    breakdown = effort_breakdown_of(series)
    return ProjectRun(
        series=series,
        completion_day=float(series.time[-1]) if done else None,
        effort_breakdown=breakdown,
        final_tasks=final.perceived_size,
        final_loc=final.perceived_size * params.loc_per_task,
        cumulative_errors=final.errors_generated,
        params=params,
        policy=policy,
        final_state=final,
    )


def effort_breakdown_of(series: TimeSeries) -> EffortBreakdown:
    if len(series) == 0:
        return EffortBreakdown(0.0, 0.0, 0.0, 0.0, 0.0)
    return EffortBreakdown(*(float(series[f"effort_{b}"][-1]) for b in EFFORT_BUCKETS))


def effort_breakdown(run: ProjectRun) -> EffortBreakdown:
    return effort_breakdown_of(run.series)
