"""Fixed-step system-dynamics runtime.

Stocks are plain ``dict[str, float]`` mappings. A *system* is any callable
``system(t, stocks) -> (derivatives, auxiliaries)``; :func:`simulate`
integrates it with forward Euler on a uniform grid and records the requested
channels at every grid point, both endpoints included.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

StockVector = dict[str, float]
System = Callable[[float, Mapping[str, float]], "tuple[Mapping[str, float], Mapping[str, float]]"]

DEFAULT_DT = 0.25


class StructuralError(ValueError):
    """Model wiring is inconsistent (mismatched names, cyclic auxiliaries)."""


class NumericError(ArithmeticError):
    """A stock or auxiliary became NaN or infinite."""

    def __init__(self, name: str, step: int | None = None, value: float = math.nan):
        self.name = name
        self.step = step
        self.value = value
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite value {value!r} for {name!r}{where}")


class TableFunction:
    """Piecewise-linear lookup, clamped to the end values outside its range."""

    def __init__(self, points: Iterable[Sequence[float]]):
        pts = [(float(x), float(y)) for x, y in points]
        if len(pts) < 2:
            raise ValueError("a table function needs at least 2 points")
        xs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"table x values must be strictly increasing: {xs}")
        if not all(math.isfinite(v) for p in pts for v in p):
            raise ValueError("table points must be finite")
        self.xs = tuple(xs)
        self.ys = tuple(p[1] for p in pts)

    @classmethod
    def constant(cls, value: float) -> "TableFunction":
        return cls([(0.0, value), (1.0, value)])

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))

    def __call__(self, x: float) -> float:
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, x)
        x0, x1 = xs[i - 1], xs[i]
        y0, y1 = ys[i - 1], ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TableFunction):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __repr__(self) -> str:
        return f"TableFunction({self.points!r})"


def lookup(table: TableFunction, x: float) -> float:
    return table(x)


@dataclass(frozen=True)
class SimConfig:
    t_start: float = 0.0
    t_end: float = 100.0
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.t_start:
            raise ValueError("t_end must not precede t_start")
        ratio = (self.t_end - self.t_start) / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
            raise ValueError(
                f"(t_end - t_start)/dt = {ratio!r} is not an integer step count"
            )

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def grid(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def time(self, k: int) -> float:
        # multiply rather than accumulate so the grid does not drift
        return self.t_start + k * self.dt


@dataclass
class TimeSeries:
    time: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)
    final_stocks: dict[str, float] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=float)
        for name, values in self.channels.items():
            if len(values) != len(self.time):
                raise StructuralError(
                    f"channel {name!r} has {len(values)} samples, grid has {len(self.time)}"
                )

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __len__(self) -> int:
        return len(self.time)

    @property
    def dt(self) -> float:
        return float(self.time[1] - self.time[0]) if len(self.time) > 1 else math.nan

    def final(self, name: str) -> float:
        return float(self.channels[name][-1])


def _check_finite(values: Mapping[str, float], step: int | None) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise NumericError(name, step, v)


def euler_step(
    state: Mapping[str, float], derivatives: Mapping[str, float], dt: float
) -> StockVector:
    """Advance every stock by ``derivative * dt``."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if state.keys() != derivatives.keys():
        missing = set(state) ^ set(derivatives)
        raise StructuralError(f"stock/derivative name mismatch: {sorted(missing)}")
    out = {name: level + derivatives[name] * dt for name, level in state.items()}
    _check_finite(out, None)
    return out


def simulate(
    system: System,
    initial: Mapping[str, float],
    config: SimConfig,
    recorded: Iterable[str] = (),
    *,
    nonnegative: Iterable[str] = (),
    stop: Callable[[float, Mapping[str, float], Mapping[str, float]], bool] | None = None,
) -> TimeSeries:
    """Integrate ``system`` with forward Euler and record channels.

    Each step evaluates auxiliaries and derivatives from the current stocks,
    then applies the Euler update. Stocks listed in ``nonnegative`` are
    clamped at zero after each update and the clamped amount is recorded in
    the ``clamped_deficit`` diagnostic. When ``stop`` returns true at a grid
    point the run ends there (that point is recorded).
    """
    recorded = list(recorded)
    nonneg = frozenset(nonnegative)
    state = dict(initial)
    _check_finite(state, 0)
    unknown = nonneg - state.keys()
    if unknown:
        raise StructuralError(f"non-negative guard on unknown stocks {sorted(unknown)}")

    n = config.n_steps
    rows: dict[str, list[float]] = {name: [] for name in recorded}
    times: list[float] = []
    deficit: list[float] = []
    step_deficit = 0.0

    for k in range(n + 1):
        t = config.time(k)
        derivs, aux = system(t, state)
        _check_finite(aux, k)
        times.append(t)
        deficit.append(step_deficit)
        for name in recorded:
            if name in state:
                rows[name].append(state[name])
            elif name in aux:
                rows[name].append(aux[name])
            else:
                raise StructuralError(f"recorded channel {name!r} is neither stock nor auxiliary")
        if k == n or (stop is not None and stop(t, state, aux)):
            break
        if state.keys() != derivs.keys():
            missing = set(state) ^ set(derivs)
            raise StructuralError(f"stock/derivative name mismatch: {sorted(missing)}")
        new = {name: level + derivs[name] * config.dt for name, level in state.items()}
        _check_finite(new, k + 1)
        step_deficit = 0.0
        for name in nonneg:
            if new[name] < 0.0:
                step_deficit += -new[name]
                new[name] = 0.0
        state = new

    return TimeSeries(
        time=np.array(times),
        channels={name: np.array(v) for name, v in rows.items()},
        diagnostics={"clamped_deficit": np.array(deficit)},
        final_stocks=dict(state),
    )


class Model:
    """Declarative stock/flow container compiled into a :data:`System`.

    Auxiliaries declare their inputs by name; evaluation order is resolved
    once at construction and a dependency cycle raises
    :class:`StructuralError`.

    >>> m = Model({"S": 100.0})
    >>> m.auxiliary("outflow", lambda S: S / 10)
    >>> m.flow("S", lambda outflow: -outflow)
    >>> ts = simulate(m.system(), m.initial, SimConfig(0, 1, 0.5), ["S"])
    >>> ts["S"].tolist()
    [100.0, 95.0, 90.25]
    """

    def __init__(self, stocks: Mapping[str, float]):
        self.initial: StockVector = dict(stocks)
        self._aux: dict[str, tuple[Callable[..., float], tuple[str, ...]]] = {}
        self._flows: dict[str, tuple[Callable[..., float], tuple[str, ...]]] = {}

    @staticmethod
    def _inputs(fn: Callable[..., float], inputs: Sequence[str] | None) -> tuple[str, ...]:
        if inputs is not None:
            return tuple(inputs)
        code = fn.__code__
        return code.co_varnames[: code.co_argcount]

    def auxiliary(self, name: str, fn: Callable[..., float], inputs: Sequence[str] | None = None):
        if name in self.initial or name in self._aux:
            raise StructuralError(f"duplicate name {name!r}")
        self._aux[name] = (fn, self._inputs(fn, inputs))

    def flow(self, stock: str, fn: Callable[..., float], inputs: Sequence[str] | None = None):
        """Set the net rate of change of ``stock``."""
        if stock not in self.initial:
            raise StructuralError(f"unknown stock {stock!r}")
        self._flows[stock] = (fn, self._inputs(fn, inputs))

    def system(self) -> System:
        known = set(self.initial) | set(self._aux) | {"time"}
        graph = {}
        for name, (_, deps) in self._aux.items():
            bad = [d for d in deps if d not in known]
            if bad:
                raise StructuralError(f"auxiliary {name!r} reads unknown names {bad}")
            graph[name] = {d for d in deps if d in self._aux}
        for stock, (_, deps) in self._flows.items():
            bad = [d for d in deps if d not in known]
            if bad:
                raise StructuralError(f"flow into {stock!r} reads unknown names {bad}")
        try:
            order = list(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise StructuralError(f"auxiliary dependency cycle: {exc.args[1]}") from None
        aux = self._aux
        flows = self._flows
        stocks = list(self.initial)

        def run(t: float, state: Mapping[str, float]):
            env = dict(state)
            env["time"] = t
            values = {}
            for name in order:
                fn, deps = aux[name]
                env[name] = values[name] = fn(*(env[d] for d in deps))
            derivs = {}
            for s in stocks:
                if s in flows:
                    fn, deps = flows[s]
                    derivs[s] = fn(*(env[d] for d in deps))
                else:
                    derivs[s] = 0.0
            return derivs, values

        return run


# -- delays -----------------------------------------------------------------


def smooth_rate(level: float, target: float, delay: float) -> float:
    return (target - level) / delay


def delay3_rates(
    levels: Sequence[float], inflow: float, delay: float
) -> tuple[tuple[float, float, float], float]:
    """Net rates of the three cascade levels and the pipeline outflow."""
    stage = delay / 3.0
    a, b, c = levels
    out1, out2, out3 = a / stage, b / stage, c / stage
    return (inflow - out1, out1 - out2, out2 - out3), out3


@dataclass(frozen=True)
class SmoothState:
    level: float
    delay: float

    def __post_init__(self):
        if not self.delay > 0:
            raise ValueError(f"smoothing delay must be positive, got {self.delay}")


@dataclass(frozen=True)
class Delay3State:
    levels: tuple[float, float, float]
    delay: float

    def __post_init__(self):
        if not self.delay > 0:
            raise ValueError(f"delay must be positive, got {self.delay}")
        if len(self.levels) != 3:
            raise ValueError("a third-order delay has exactly three levels")

    @classmethod
    def empty(cls, delay: float) -> "Delay3State":
        return cls((0.0, 0.0, 0.0), delay)

    @property
    def content(self) -> float:
        return sum(self.levels)

    @property
    def outflow(self) -> float:
        return self.levels[2] * 3.0 / self.delay


def smooth_update(s: SmoothState, input: float, dt: float) -> SmoothState:
    """One Euler step of first-order exponential smoothing."""
    return SmoothState(s.level + smooth_rate(s.level, input, s.delay) * dt, s.delay)


def delay3_update(d: Delay3State, inflow: float, dt: float) -> tuple[Delay3State, float]:
    """One Euler step of a third-order material delay.

    Returns the new state and the outflow rate that was applied over the step.
    """
    if inflow < 0:
        raise ValueError(f"material delay inflow must be non-negative, got {inflow}")
    rates, outflow = delay3_rates(d.levels, inflow, d.delay)
    levels = tuple(x + r * dt for x, r in zip(d.levels, rates))
    return Delay3State(levels, d.delay), outflow
