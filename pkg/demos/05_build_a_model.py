"""The engine on its own: a hiring pipeline in a dozen lines.

Stocks, auxiliaries and flows are declared by name; the engine orders the
auxiliaries, integrates with fixed-step Euler and records what you ask for.
"""
from projdyn.engine import Model, SimConfig, TableFunction, simulate

# willingness to hire falls as the deadline nears
willingness = TableFunction([(0, 0.0), (20, 1.0)])

m = Model({"staff": 3.0, "in_pipeline": 0.0})
m.auxiliary("gap", lambda staff, in_pipeline: max(0.0, 12.0 - staff - in_pipeline))
m.auxiliary("hiring", lambda gap, time: willingness(60 - time) * gap / 10.0)
m.auxiliary("arrivals", lambda in_pipeline: in_pipeline / 15.0)
m.flow("in_pipeline", lambda hiring, arrivals: hiring - arrivals)
m.flow("staff", lambda arrivals: arrivals)

ts = simulate(m.system(), m.initial, SimConfig(0, 80, 0.25), ["staff", "in_pipeline", "hiring"])
for day in range(0, 81, 10):
    k = day * 4
    print(f"day {day:3d}: staff {ts['staff'][k]:5.2f}  pipeline {ts['in_pipeline'][k]:5.2f}  hiring {ts['hiring'][k]:.3f}/day")
