"""Scenario registry: concrete exact paths with known answers.

Each scenario builds a Lagrangian mesh, a Hamiltonian, integrates the path,
and reports its Hofer length, the criticality verdict and the deviation of
the integrated flow from the closed-form flow.

* ``projective-rotation``: RP^n inside CP^n under the rotation of the
  coordinates ``z_1..z_k``.  The maximum of ``H`` on ``L_t`` sits on
  ``{z_1 = ... = z_k = 0}``, the minimum on ``{z_0 = z_{k+1} = ... = z_n = 0}``;
  both loci are fixed pointwise, so the path is critical.
* ``torus-graph``: the zero section of T^2 pushed by ``H = f(x)``; the
  critical points of ``f`` stay put and realize the extrema.
* ``translated-circle``: the unit circle translated by ``H = x``; the
  extremal points move, so the path is not critical.
* ``disjoint-endpoints``: a circle translated until it no longer meets its
  starting position.  No point lies on every ``L_t``, so no connecting exact
  path can be critical.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, fields, replace
from datetime import datetime, timezone

import numpy as np

from . import crit, geom
from .crit import CriticalityReport, Tolerances
from .flow import FlowConfig, HamiltonianSpec, integrate_path, projective_rotation_hamiltonian
from .geom import Euclidean, Projective, Torus
from .hofer import LengthBreakdown, breakdown
from .lagr import LagrangianMesh, ModelGrid, PathLift, associated_function_from_H, consistency_deviation


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    n: int = 1
    k: int = 1
    s: float = 1.0
    gap: float = 1.0
    amplitude: float = 0.1
    mesh: int = 512
    mesh_theta: int = 65
    mesh_phi: int = 128
    tsamples: int = 201
    steps: int = 200
    stepper: str = "rk4"
    budget: int = 200
    seed: int = 0
    offset: float = 0.0
    warp: float = 0.0
    tol_val: float | None = None
    tol_geo: float | None = None
    tol_probe: float | None = None
    out: str | None = None

    def __post_init__(self):
        if self.scenario not in REGISTRY:
            raise ScenarioError(f"unknown scenario {self.scenario!r}; known: {', '.join(REGISTRY)}")
        if self.mesh < 64:
            raise ScenarioError("mesh needs at least 64 nodes per circle")
        if self.tsamples < 2:
            raise ScenarioError("need at least two time samples")
        if self.budget < 1:
            raise ScenarioError("probe budget must be positive")
        if not 0 <= self.offset < 1:
            raise ScenarioError("mesh offset must lie in [0, 1)")
        if self.warp < 0:
            raise ScenarioError("warp must be nonnegative")
        tols = (self.tol_val, self.tol_geo, self.tol_probe)
        if any(t is not None for t in tols) and any(t is None for t in tols):
            raise ScenarioError("tolerances must be given all together or not at all")
        FlowConfig(self.stepper, self.steps)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "scenario" not in data:
            raise ScenarioError("config needs a scenario id")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def flow(self) -> FlowConfig:
        return FlowConfig(self.stepper, self.steps)

    @property
    def tolerances(self) -> Tolerances | None:
        if self.tol_val is None:
            return None
        return Tolerances(self.tol_val, self.tol_geo, self.tol_probe)


@dataclass(frozen=True)
class Rate:
    """Speed profile ``rho(t) = 1 + warp t^2`` and its antiderivative."""

    warp: float = 0.0

    def __call__(self, t):
        return 1.0 + self.warp * t * t

    def integral(self, t):
        return t + self.warp * t ** 3 / 3


@dataclass(eq=False)
class Built:
    kind: object
    lift: PathLift
    H: HamiltonianSpec
    exact: np.ndarray
    notes: list
    extras: dict


@dataclass(eq=False)
class ScenarioReport:
    scenario: str
    config: ScenarioConfig
    length: LengthBreakdown
    criticality: CriticalityReport
    oracle: dict
    notes: list
    checks: dict
    extras: dict
    wall_clock: float
    timestamp: str
    lift: PathLift | None = None
    H: HamiltonianSpec | None = None

    @property
    def verdict(self) -> str:
        return self.criticality.verdict

    @property
    def checks_ok(self) -> bool:
        return all(c["ok"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config.to_dict(),
            "length": self.length.to_dict(),
            "criticality": self.criticality.to_dict(),
            "oracle": self.oracle,
            "notes": self.notes,
            "checks": self.checks,
            "extras": self.extras,
            "run": {"timestamp": self.timestamp, "wall_clock_s": self.wall_clock},
        }

    def comparable_dict(self) -> dict:
        """Report without the run-timing block, for determinism comparisons."""
        d = self.to_dict()
        d.pop("run")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def probes_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "s_star", "decrease"])
        d = self.criticality.descent
        for s in ([] if d is None else d.summaries):
            w.writerow([s.id, repr(s.s_star), repr(s.decrease)])
        return buf.getvalue()

    def candidates_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "max", "min", "dist_plus", "dist_minus"])
        per = self.criticality.persistence
        for i, t in enumerate(self.length.t):
            dp, dm = (np.nan, np.nan) if per is None else per.distances[i]
            w.writerow([repr(float(t)), repr(float(self.length.hmax[i])), repr(float(self.length.hmin[i])),
                        repr(float(dp)), repr(float(dm))])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# builders


def set_distance(kind, a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance from a node image in ``a`` to the nearest node image in ``b``."""
    return float(crit._NearestImage(kind, b)(a).max())


def _tgrid(cfg: ScenarioConfig) -> np.ndarray:
    return np.linspace(0.0, 1.0, cfg.tsamples)


def _rated(H: HamiltonianSpec, rate: Rate) -> HamiltonianSpec:
    if rate.warp == 0:
        return H
    grad = None if H.grad is None else (lambda t, p: rate(t) * H.grad(t, p))
    return HamiltonianSpec(lambda t, p: rate(t) * H.func(t, p), grad, None, H.support, H.cutoff,
                           False, f"{H.label}*rho")


def _circle(grid: ModelGrid, centre=(0.0, 0.0)) -> np.ndarray:
    th = grid.params[:, 0]
    return np.column_stack([centre[0] + np.cos(th), centre[1] + np.sin(th)])


def _translation(kind, direction: np.ndarray, rate: Rate, label: str) -> HamiltonianSpec:
    """Autonomous linear H whose flow translates by ``direction`` per unit time."""
    # X = (dH/dy, -dH/dx) = direction  =>  grad H = (-dy, dx)
    g = np.array([-direction[1], direction[0]], dtype=float)

    def func(t, p):
        return np.atleast_2d(p) @ g

    def grad(t, p):
        return np.broadcast_to(g, np.atleast_2d(p).shape).copy()

    H = HamiltonianSpec(func, grad, None, "global", None, True, label)
    return _rated(H, rate)


def build_projective_rotation(cfg: ScenarioConfig) -> Built:
    n, k, s = cfg.n, cfg.k, cfg.s
    if n not in (1, 2):
        raise ScenarioError("projective meshes are available for n = 1 and n = 2")
    if not 1 <= k <= n:
        raise ScenarioError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not 0 < s <= 1:
        raise ScenarioError("rotation speed s must lie in (0, 1]")
    kind = Projective(n)
    if n == 1:
        grid = ModelGrid.rp1(cfg.mesh, cfg.offset)
        phi = grid.params[:, 0]
        images = np.column_stack([np.cos(phi), np.sin(phi)]).astype(complex)
    else:
        if cfg.offset:
            raise ScenarioError("mesh offset is only available on circle meshes")
        if cfg.mesh_theta % 2 == 0 or cfg.mesh_phi % 4:
            raise ScenarioError("RP^2 mesh needs odd mesh_theta and mesh_phi divisible by 4")
        grid = ModelGrid.rp2(cfg.mesh_theta, cfg.mesh_phi)
        th, ph = grid.params[:, 0], grid.params[:, 1]
        images = np.column_stack([np.cos(th), np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph)]).astype(complex)
    rate = Rate(cfg.warp)
    H = projective_rotation_hamiltonian(n, k, s, rate if cfg.warp else None)
    L0 = LagrangianMesh(kind, grid, images)
    tg = _tgrid(cfg)
    lift = integrate_path(kind, H, L0, tg, cfg.flow)
    exact = np.stack([H.oracle(t, images) for t in tg])
    notes = [
        f"H = -s |z_1..z_{k}|^2 / (2|z|^2), additive constant dropped",
        f"max of H on L_t lies on {{z_1 = ... = z_{k} = 0}} (an RP^{n - k}); "
        f"min on {{z_0 = 0 = z_{k + 1}..z_{n}}} (an RP^{k - 1})",
        "extrema sets are those of H restricted to L_t; over all of CP^n the max is attained on a CP^{n-k}",
    ]
    # L_1 = L_0 as sets when the rotation angle reaches pi
    loop = set_distance(kind, lift.images[-1], lift.images[0]) if s == 1 and not cfg.warp else None
    return Built(kind, lift, H, exact, notes, {"loop_closure": loop})


def build_torus_graph(cfg: ScenarioConfig) -> Built:
    a = cfg.amplitude
    rate = Rate(cfg.warp)
    if abs(a) * rate(1.0) >= 0.25:
        raise ScenarioError("|amplitude| must stay below 1/4 so the graphs remain embedded")
    kind = Torus(1)
    grid = ModelGrid.circle(cfg.mesh, cfg.offset)
    x = grid.params[:, 0] / (2 * np.pi)
    images = np.column_stack([x, np.zeros_like(x)])

    def func(t, p):
        return a * np.cos(2 * np.pi * np.atleast_2d(p)[:, 0]) / (2 * np.pi)

    def grad(t, p):
        p = np.atleast_2d(p)
        return np.column_stack([-a * np.sin(2 * np.pi * p[:, 0]), np.zeros(len(p))])

    H = _rated(HamiltonianSpec(func, grad, None, "global", None, True, f"f(x), a={a}"), rate)
    L0 = LagrangianMesh(kind, grid, images)
    tg = _tgrid(cfg)
    lift = integrate_path(kind, H, L0, tg, cfg.flow)
    # flow: x fixed, y -> y - T(t) f'(x) with T the elapsed time
    fprime = -a * np.sin(2 * np.pi * x)
    exact = np.stack([geom.reduce_point(kind, np.column_stack([x, -rate.integral(t) * fprime])) for t in tg])
    notes = [
        "L_t is the graph of -T(t) f'(x); the critical points x = 0 (max for a > 0) "
        "and x = 1/2 (min for a > 0) are fixed",
    ]
    return Built(kind, lift, H, exact, notes, {})


def build_translated_circle(cfg: ScenarioConfig) -> Built:
    kind = Euclidean(1)
    rate = Rate(cfg.warp)
    grid = ModelGrid.circle(cfg.mesh, cfg.offset)
    images = _circle(grid)
    H = _translation(kind, np.array([0.0, -1.0]), rate, "x")
    L0 = LagrangianMesh(kind, grid, images)
    tg = _tgrid(cfg)
    lift = integrate_path(kind, H, L0, tg, cfg.flow)
    exact = np.stack([images + np.array([0.0, -rate.integral(t)]) for t in tg])
    notes = ["H = x translates the unit circle downwards; its extremal points move with it"]
    return Built(kind, lift, H, exact, notes, {})


def build_disjoint_endpoints(cfg: ScenarioConfig) -> Built:
    if cfg.gap <= 0:
        raise ScenarioError("gap must be positive")
    kind = Euclidean(1)
    rate = Rate(cfg.warp)
    shift = (2.0 + cfg.gap) / rate.integral(1.0)
    grid = ModelGrid.circle(cfg.mesh, cfg.offset)
    images = _circle(grid)
    H = _translation(kind, np.array([0.0, shift]), rate, f"-{shift:g} x")
    L0 = LagrangianMesh(kind, grid, images)
    tg = _tgrid(cfg)
    lift = integrate_path(kind, H, L0, tg, cfg.flow)
    exact = np.stack([images + np.array([0.0, shift * rate.integral(t)]) for t in tg])
    d = geom.distance_raw(kind, lift.images[0][:, None, :], lift.images[-1][None, :, :])
    notes = [
        f"L_0 and L_1 are unit circles whose centres are {2 + cfg.gap:g} apart",
        "L_0 and L_1 are disjoint, so no point lies on every L_t: no exact path between them "
        "is length-critical, and the descent search exhibits a shortening direction",
    ]
    return Built(kind, lift, H, exact, notes, {"endpoint_distance": float(d.min())})


REGISTRY = {
    "projective-rotation": build_projective_rotation,
    "torus-graph": build_torus_graph,
    "translated-circle": build_translated_circle,
    "disjoint-endpoints": build_disjoint_endpoints,
}

DESCRIPTIONS = {
    "projective-rotation": "RP^n in CP^n rotated in z_1..z_k (options: --n --k --s)",
    "torus-graph": "zero section of T^2 pushed by a*cos(2 pi x)/(2 pi) (option: --amplitude)",
    "translated-circle": "unit circle translated by H = x",
    "disjoint-endpoints": "unit circle translated past itself (option: --gap)",
}


# ---------------------------------------------------------------------------
# running and self-checks


def _check(ok, value=None) -> dict:
    out = {"ok": bool(ok)}
    if value is not None:
        out["value"] = float(value)
    return out


def _self_checks(lift: PathLift, H, h, rep: CriticalityReport, length: LengthBreakdown,
                 seed: int) -> dict:
    checks = {}
    tol = rep.tolerances
    d = rep.descent
    if rep.verdict == "critical":
        ok = bool(rep.p_plus.size and rep.p_minus.size and (d is None or d.decrease <= tol.tol_probe))
        checks["critical_has_candidates_and_no_descent"] = _check(ok)
    if rep.verdict == "non-critical":
        ok = bool(rep.certificate is not None or rep.p_plus.size == 0 or rep.p_minus.size == 0)
        checks["non_critical_has_evidence"] = _check(ok)
    if d is not None and d.probe is not None:
        again = crit.verify_certificate(lift, h, d.probe, d.s_star)
        checks["certificate_reproduces"] = _check(abs(again - d.decrease) <= 1e-9, again)
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, lift.grid.size, size=10)
        ti = rng.integers(0, lift.ntimes, size=10)
        pts = lift.images[ti, idx]
        resid = crit.membership_residual(d.probe, pts)
        checks["certificate_zero_mean"] = _check(resid <= crit.MEMBERSHIP_TOL, resid)
    u0 = crit.probe_length_function(h, lift, np.zeros_like(h.values), [0.0])[0]
    checks["u0_equals_length"] = _check(abs(u0 - length.total) <= 1e-12 * max(1.0, length.total), u0)
    return checks


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    start = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    built = REGISTRY[cfg.scenario](cfg)
    lift, H = built.lift, built.H
    h = associated_function_from_H(lift, H)
    worst, allowed = consistency_deviation(lift, h)
    length = breakdown(h, lift)
    rep = crit.quasi_autonomy_verdict(lift, H, cfg.tolerances, cfg.budget, cfg.seed, check=False)
    oracle = {
        "max_node_distance": float(geom.distance_raw(built.kind, lift.images, built.exact).max()),
        "consistency_deviation": worst,
        "consistency_allowed": allowed,
    }
    checks = _self_checks(lift, H, h, rep, length, cfg.seed)
    checks["consistency"] = _check(worst <= allowed, worst)
    return ScenarioReport(cfg.scenario, cfg, length, rep, oracle, built.notes, checks, built.extras,
                          time.perf_counter() - start, stamp, lift, H)


def run(scenario: str, **options) -> ScenarioReport:
    return run_scenario(ScenarioConfig(scenario=scenario, **options))


def scenario_projective_rotation(n: int = 1, k: int = 1, s: float = 1.0, **options) -> ScenarioReport:
    return run("projective-rotation", n=n, k=k, s=s, **options)


def scenario_torus_graph(amplitude: float = 0.1, **options) -> ScenarioReport:
    return run("torus-graph", amplitude=amplitude, **options)


def scenario_translated_circle(**options) -> ScenarioReport:
    return run("translated-circle", **options)


def scenario_disjoint_endpoints(gap: float = 1.0, **options) -> ScenarioReport:
    return run("disjoint-endpoints", gap=gap, **options)


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    return replace(cfg, **changes)
