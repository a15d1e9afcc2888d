"""Command-line entry point: simulate, calibrate, compare and sweep."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .calibration import CalibrationError, ProjectMetrics, calibrate
from .engine import NumericError, StructuralError
from .scenario import (
    CompareError,
    ScenarioError,
    compare_files,
    effort_spread_pct,
    load_scenario,
    sweep,
    sweep_ranking,
    write_outputs,
    write_sweep,
)
from .volatility import VolatilityError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_LOAD = 3
EXIT_NUMERIC = 4
EXIT_INCOMPLETE = 5


def _window(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be two numbers: start,end") from None
    if not b > a:
        raise argparse.ArgumentTypeError("window end must exceed its start")
    return a, b


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    run = sc.run()
    summary = write_outputs(run, args.out)
    if not summary.completed:
        print(
            f"project did not complete by day {summary.final_day:g}; partial results written to {args.out}",
            file=sys.stderr,
        )
        return EXIT_INCOMPLETE
    print(
        f"completed on day {summary.completion_day:g}, "
        f"effort {summary.effort_breakdown['total']:.1f} person-days "
        f"({summary.effort_overrun_pct:+.1f}% vs estimate)"
    )
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cal = calibrate(ProjectMetrics.from_dict(_read_json(args.metrics)))
    text = json.dumps(cal.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    for e in cal.trace:
        print(f"{e.name}: {e.formula}")
    return EXIT_OK


def cmd_compare(args) -> int:
    report = compare_files(args.sim, args.actual)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    rows = sweep(sc, args.volume_loc, args.window)
    write_sweep(rows, args.out)
    print("ranking by total effort: " + " > ".join(sweep_ranking(rows)))
    print(f"effort spread: {effort_spread_pct(rows):.2f}%")
    return EXIT_OK if all(r.completed for r in rows) else EXIT_INCOMPLETE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="projdyn", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario and write timeseries.csv and summary.json")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", help="derive model parameters from project metrics")
    c.add_argument("--metrics", required=True)
    c.add_argument("--out", help="write parameters and trace as JSON")
    c.set_defaults(func=cmd_calibrate)

    m = sub.add_parser("compare", help="score a simulated time series against actuals")
    m.add_argument("--sim", required=True, help="timeseries.csv from simulate")
    m.add_argument("--actual", required=True, help="CSV with a day column and any shared channels")
    m.add_argument("--out")
    m.set_defaults(func=cmd_compare)

    w = sub.add_parser("sweep", help="run all canonical volatility patterns")
    w.add_argument("--scenario", required=True)
    w.add_argument("--volume-loc", required=True, type=float)
    w.add_argument("--window", required=True, type=_window, help="start,end in working days")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ScenarioError, CalibrationError, VolatilityError, CompareError, StructuralError,
        FileNotFoundError, json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
