"""Hofer length and length-criticality of exact Lagrangian paths."""
from .crit import (
    CriticalityReport,
    ProbeDirection,
    Tolerances,
    canonical_probe,
    convex_majorant_check,
    descent_search,
    extrema_sets,
    make_probe_separable,
    persistent_extrema,
    probe_length_function,
    quasi_autonomy_verdict,
)
from .extend import BumpProfile, normalize_for_extension, tubular_extension
from .flow import FlowConfig, HamiltonianSpec, integrate_path, oracle_path
from .geom import Euclidean, Projective, Torus
from .hofer import hofer_length, hofer_norm, oscillation
from .lagr import AssociatedFunction, LagrangianMesh, ModelGrid, PathLift
from .scenarios import ScenarioConfig, run, run_scenario

__version__ = "0.1.0"
