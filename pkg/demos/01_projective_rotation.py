"""
Rotating RP^n inside CP^n
=========================

The real projective space sits in CP^n as a Lagrangian.  Rotating the first
k homogeneous coordinates by a phase moves it through a loop of Lagrangians,
generated by the autonomous Hamiltonian H = -s |z_1..z_k|^2 / (2 |z|^2).
"""

# %%
import numpy as np

from hoferlab import geom, scenarios

report = scenarios.scenario_projective_rotation(n=1, k=1, s=1.0)
lift = report.lift
print(f"{lift.grid.size} nodes, {lift.ntimes} time samples")

# %%
# The integrated flow against the explicit phase rotation.
print("max node distance to the exact rotation:", report.oracle["max_node_distance"])
print("distance between L_1 and L_0 as sets:", report.extras["loop_closure"])

# %%
# Restricted to each L_t the Hamiltonian runs from -s/2 to 0, so every time
# slice contributes s/2 to the length.
length = report.length
print("oscillation range over time:", length.osc.min(), length.osc.max())
print("Hofer length:", length.total)

# %%
# Points fixed by the rotation stay extremal for every t.
crit = report.criticality
print("verdict:", crit.verdict, "-", crit.reason)
print("p+ =", np.round(crit.p_plus[0], 6), " p- =", np.round(crit.p_minus[0], 6))
print("best probe decrease:", crit.descent.decrease)

# %%
# In CP^2 with k = 1 the maximum is attained on a whole circle {z_1 = 0}
# and the minimum at the single point [0:1:0].  The extremum is quadratic,
# so a tight value tolerance keeps the extremal node sets on those loci.
two = scenarios.scenario_projective_rotation(n=2, k=1, s=0.5, tsamples=51, budget=50,
                                             tol_val=2.5e-7, tol_geo=0.1, tol_probe=2.5e-4)
track, lift2 = two.criticality.track, two.lift
ti = lift2.ntimes // 2
top = lift2.images[ti][track.maxsets[ti]]
bottom = lift2.images[ti][track.minsets[ti]]
print(f"{len(top)} maximal nodes, largest |z_1| = {np.abs(top[:, 1]).max():.2e}")
print(f"{len(bottom)} minimal nodes, distance to [0:1:0] = "
      f"{geom.distance_raw(lift2.kind, bottom, np.array([0, 1, 0])).max():.2e}")
print("verdict:", two.verdict)
