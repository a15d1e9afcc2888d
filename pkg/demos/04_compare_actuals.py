"""Score a simulation against sparse actual observations.

Actuals rarely come as a full series. Here there is a single observed point
(total effort and the effort-equivalent schedule at day 245), and the
comparison interpolates the simulation to it.
"""
from projdyn.scenario import ACBS_SCENARIO, DATA_DIR, compare, load_scenario, parse_csv_columns, read_csv_columns, timeseries_csv

run = load_scenario(ACBS_SCENARIO).run()
report = compare(parse_csv_columns(timeseries_csv(run)), read_csv_columns(DATA_DIR / "acbs_actuals.csv", sparse=True))

for channel, c in report.channels.items():
    print(f"{channel:22s} MAPE {c.mape:6.2f}%  final delta {c.final_delta_pct:+6.2f}%  ({c.matched} sample)")
