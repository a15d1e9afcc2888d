"""Derive model parameters for the ACBS project from its raw metrics.

Every number the simulator starts from is plain arithmetic on a handful of
project records. The trace prints each step so it can be checked by hand.
"""
from projdyn.calibration import ProjectMetrics, calibrate
from projdyn.scenario import DATA_DIR

metrics = ProjectMetrics.load(DATA_DIR / "acbs_metrics.json")
cal = calibrate(metrics)

print("Derivation trace")
for entry in cal.trace:
    print(f"  {entry.name:32s} {entry.formula}")

p = cal.parameters
print()
print(f"The plan: {p.initial_size_loc:.0f} LOC ({p.initial_size_tasks:.1f} tasks) in "
      f"{p.effort_estimate:.0f} person-days over {p.schedule_estimate:.0f} working days, "
      f"starting with {p.initial_workforce:.0f} people.")
print(f"That plan assumes {p.planned_productivity * p.loc_per_task:.1f} LOC per person-day all-in,")
print(f"while the environment supports about {p.nominal_potential_productivity:.1f} LOC per person-day "
      f"before any losses.")
