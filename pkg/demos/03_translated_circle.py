"""
A translated circle is not length critical
==========================================

H = x slides the unit circle downwards.  The extremal points of x on the
circle travel with it, so no point stays extremal, and a direction that
shortens the path can be written down explicitly.
"""

# %%
import numpy as np

from hoferlab import crit, scenarios
from hoferlab.lagr import associated_function_from_H

report = scenarios.scenario_translated_circle()
lift, H = report.lift, report.H
print("Hofer length:", report.length.total)
print("persistent candidates:", report.criticality.p_plus.shape[0], report.criticality.p_minus.shape[0])

# %%
# The canonical probe of an autonomous Hamiltonian vanishes, so the search
# also builds a probe from a time-dependent extension of h off the circles.
h = associated_function_from_H(lift, H)
probe = crit.extension_probe(lift, h)
s = np.linspace(-0.5, 0.5, 11)
u = crit.probe_length_function(h, lift, probe, s)
for si, ui in zip(s, u):
    print(f"s = {si:+.2f}   u(s) = {ui:.4f}")

# %%
cert = report.criticality.certificate
print("verdict:", report.verdict)
print(f"certificate: probe {cert.id}, s* = {cert.s_star}, decrease {cert.decrease:.4f}")
print("the probe integrates to zero in time:",
      crit.membership_residual(report.criticality.descent.probe, lift.images[::20, ::64].reshape(-1, 2)))
