"""
Second-order convergence of the length
======================================

Meshes offset by half a step put the true extrema between nodes, and a
warped time profile rho(t) = 1 + t^2 makes the trapezoid rule inexact.
Doubling nodes and time samples together should cut the error by four.
"""

# %%
from hoferlab import scenarios

for name in scenarios.REGISTRY:
    lengths = [scenarios.run(name, mesh=m, tsamples=T, budget=1, offset=0.5, warp=1.0).length.total
               for m, T in ((64, 11), (128, 21), (256, 41))]
    ratio = (lengths[0] - lengths[1]) / (lengths[1] - lengths[2])
    print(f"{name:22s} " + "  ".join(f"{x:.8f}" for x in lengths) + f"   ratio {ratio:.3f}")
