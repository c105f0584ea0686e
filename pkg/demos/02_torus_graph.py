"""
Graphs over the zero section of T^2
===================================

H = a cos(2 pi x) / (2 pi) pushes the circle {y = 0} through the graphs
y = -t f'(x).  The critical points of f never move, so they stay extremal.
"""

# %%
import numpy as np

from hoferlab import scenarios

report = scenarios.scenario_torus_graph(amplitude=0.1)
print("max node distance to the exact graphs:", report.oracle["max_node_distance"])

# %%
# Along node labels H restricted to L_t is f itself, so the length is osc(f) = a / pi.
print("Hofer length:", report.length.total, " a/pi =", 0.1 / np.pi)

# %%
crit = report.criticality
print("verdict:", crit.verdict)
print("p+ =", crit.p_plus[0], " p- =", crit.p_minus[0])

# %%
# A negative amplitude swaps the roles of the two critical points.
flipped = scenarios.scenario_torus_graph(amplitude=-0.1)
print("a < 0: p+ =", flipped.criticality.p_plus[0], " p- =", flipped.criticality.p_minus[0])

# %%
# With a = 0 the path is constant and nothing can be said.
still = scenarios.scenario_torus_graph(amplitude=0.0, mesh=128, tsamples=21, budget=5)
print("a = 0:", still.verdict, "-", still.criticality.reason)
