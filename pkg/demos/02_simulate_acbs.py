"""Run the shipped ACBS scenario and read the story off its time series.

The plan said 90 days and 630 person-days. Change requests keep arriving,
schedule pressure builds, hiring follows, and the newcomers slow everyone
down before they help.
"""
import sys
import tempfile
from pathlib import Path

from projdyn.scenario import ACBS_SCENARIO, load_scenario, summarize, write_outputs

scenario = load_scenario(ACBS_SCENARIO)
for note in scenario.notes:
    print("note:", note)

run = scenario.run()
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="acbs-"))
summary = write_outputs(run, out)

print()
print(f"completed: {summary.completed} on day {summary.completion_day}")
print(f"schedule overrun {summary.schedule_overrun_pct:.0f}%, effort overrun {summary.effort_overrun_pct:.0f}%")
print("effort by bucket (person-days):")
for bucket, value in summary.effort_breakdown.items():
    print(f"  {bucket:9s} {value:8.1f}")

s = run.series
print()
print(" day  workforce  rookies  LOC/pd  scheduled  developed  tested")
for day in range(0, int(s.time[-1]) + 1, 20):
    k = int(day / scenario.sim.dt)
    print(f"{day:4d} {s['workforce_total'][k]:10.1f} {s['workforce_rookies'][k]:8.1f} "
          f"{s['productivity_loc_per_manday'][k]:7.2f} {s['scheduled_completion'][k]:10.1f} "
          f"{s['tasks_developed'][k]:10.1f} {s['tasks_tested'][k]:7.1f}")
print(f"\nfull series written to {out / 'timeseries.csv'}")
