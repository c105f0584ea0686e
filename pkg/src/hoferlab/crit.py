"""Length-criticality of exact Lagrangian paths.

An exact path with lift ``iota_t`` and associated function ``h`` is critical
for the Hofer length iff it is quasi-autonomous: two points ``p+``, ``p-``
lie on every ``L_t`` and realize ``max h_t`` and ``min h_t`` for all ``t``.

Variations are probed through the convex model

    u(s) = || h - s G o iota_t ||,

where ``G`` ranges over time-dependent functions with zero time mean at
every ambient point.  ``u(s) < u(0)`` for some ``s`` is a constructive
certificate that the path can be shortened to first order.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from . import geom
from .extend import PathExtension, smoothstep
from .geom import ManifoldKind, Projective, Torus
from .hofer import InconsistentPathError, hofer_norm, oscillation, trapezoid
from .lagr import AssociatedFunction, PathLift, associated_function_from_H, consistency_deviation

PROBE_MEAN_TOL = 1e-10
MEMBERSHIP_TOL = 1e-8


class ProbeError(ValueError):
    """A candidate probe does not have zero time mean."""


def default_sgrid() -> np.ndarray:
    fine = np.geomspace(1e-3, 0.05, 6)
    return np.unique(np.concatenate([np.linspace(-1.0, 1.0, 41), fine, -fine]))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HOFERLAB_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# tolerances and extrema


@dataclass(frozen=True)
class Tolerances:
    tol_val: float
    tol_geo: float
    tol_probe: float

    @classmethod
    def for_path(cls, lift: PathLift, h: AssociatedFunction) -> "Tolerances":
        """``1e-3`` x mean oscillation, 2 x max mesh spacing, ``1e-3`` x Hofer norm."""
        osc = oscillation(h.values)
        norm = hofer_norm(h, lift.tgrid)
        spacing = max(_spacing(lift, i) for i in range(lift.ntimes))
        return cls(1e-3 * float(osc.mean()), 2.0 * spacing, 1e-3 * norm)

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.tol_val * factor, self.tol_geo * factor, self.tol_probe)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _spacing(lift: PathLift, ti: int) -> float:
    im = lift.images[ti]
    nb = lift.grid.neighbours()
    return float(geom.distance_raw(lift.kind, im[:, None, :], im[nb]).max())


def extrema_sets(values, tol_val: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Node indices within ``tol_val`` of the max and of the min."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty slice")
    return np.flatnonzero(v >= v.max() - tol_val), np.flatnonzero(v <= v.min() + tol_val)


@dataclass(eq=False)
class ExtremaTrack:
    maxsets: list
    minsets: list
    tol_val: float
    tol_geo: float

    @classmethod
    def build(cls, h: AssociatedFunction, tol_val: float, tol_geo: float) -> "ExtremaTrack":
        pairs = [extrema_sets(row, tol_val) for row in h.values]
        return cls([p[0] for p in pairs], [p[1] for p in pairs], tol_val, tol_geo)


class _NearestImage:
    """Distance from ambient points to the nearest node image of one mesh."""

    def __init__(self, kind: ManifoldKind, images: np.ndarray):
        self.kind = kind
        self.images = images
        if isinstance(kind, Projective):
            self.tree = cKDTree(geom.embed_real(kind, images))
        else:
            self.tree = cKDTree(images, boxsize=1.0 if isinstance(kind, Torus) else None)

    def __call__(self, p: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(p)
        q = geom.embed_real(self.kind, p) if isinstance(self.kind, Projective) else p
        _, idx = self.tree.query(q)
        return geom.distance_raw(self.kind, p, self.images[idx])


@dataclass(eq=False)
class Persistence:
    """Candidates for ``p+`` / ``p-`` and their worst distance to ``L_t``."""

    plus_nodes: np.ndarray
    minus_nodes: np.ndarray
    plus_points: np.ndarray
    minus_points: np.ndarray
    plus_drift: np.ndarray
    minus_drift: np.ndarray
    distances: np.ndarray  # (T, 2): distance of the best plus/minus start node to L_t


def _persistence(lift: PathLift, H, h: AssociatedFunction, tol_val: float, tol_geo: float) -> Persistence:
    maxset, minset = extrema_sets(h.values[0], tol_val)
    start = lift.images[0]
    kind = lift.kind
    cand = {+1: maxset, -1: minset}
    alive = {k: np.ones(v.size, dtype=bool) for k, v in cand.items()}
    drift = {k: np.zeros(v.size) for k, v in cand.items()}
    best_start = {k: int(v[np.argmax(h.values[0, v])] if k > 0 else v[np.argmin(h.values[0, v])])
                  for k, v in cand.items()}
    trace = np.zeros((lift.ntimes, 2))
    for ti, t in enumerate(lift.tgrid):
        near = _NearestImage(kind, lift.images[ti])
        hmax, hmin = h.values[ti].max(), h.values[ti].min()
        for col, (sign, nodes) in enumerate(cand.items()):
            pts = start[nodes]
            d = near(pts)
            drift[sign] = np.maximum(drift[sign], d)
            val = np.broadcast_to(H(t, pts), (nodes.size,))
            ok_val = val >= hmax - tol_val if sign > 0 else val <= hmin + tol_val
            alive[sign] &= (d <= tol_geo) & ok_val
            trace[ti, col] = float(near(start[best_start[sign]][None])[0])
    out = {}
    for sign in (+1, -1):
        nodes = cand[sign][alive[sign]]
        dr = drift[sign][alive[sign]]
        order = np.lexsort((nodes, dr))
        out[sign] = (nodes[order], dr[order])
    return Persistence(
        plus_nodes=out[1][0],
        minus_nodes=out[-1][0],
        plus_points=start[out[1][0]],
        minus_points=start[out[-1][0]],
        plus_drift=out[1][1],
        minus_drift=out[-1][1],
        distances=trace,
    )


def persistent_extrema(lift: PathLift, H, tol_val: float, tol_geo: float,
                       h: AssociatedFunction | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Ambient points of ``L_0`` that stay on every ``L_t`` and keep realizing its max (min).

    A ``t = 0`` extremal node image ``p`` qualifies when, at every time sample,
    the nearest node of ``L_t`` is within ``tol_geo`` and ``H(t, p)`` is
    within ``tol_val`` of ``max h_t`` (resp. ``min h_t``).  Points are ordered
    by drift, smallest first.
    """
    h = associated_function_from_H(lift, H) if h is None else h
    res = _persistence(lift, H, h, tol_val, tol_geo)
    return res.plus_points, res.minus_points


# ---------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class TimeProfile:
    """Zero-mean time profile ``c(t)``; ``kind`` is ``"cos"``, ``"sin"`` or ``"square"``."""

    kind: str
    freq: int = 1
    width: float = 0.05

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "cos":
            return np.cos(2 * np.pi * self.freq * t)
        if self.kind == "sin":
            return np.sin(2 * np.pi * self.freq * t)
        if self.kind == "square":
            return np.tanh((0.5 - t) / self.width)
        raise ValueError(f"unknown profile {self.kind!r}")


@dataclass(frozen=True)
class Bump:
    """Radial bump ``1 - smoothstep(d(p, centre) / radius)`` in the ambient distance."""

    kind: ManifoldKind
    centre: np.ndarray
    radius: float

    def __call__(self, p):
        d = geom.distance_raw(self.kind, np.atleast_2d(p), self.centre)
        return 1.0 - smoothstep(d / self.radius)


@dataclass(eq=False)
class ProbeDirection:
    """A direction ``G(t, p)`` with zero time mean at every point."""

    func: Callable
    family: str
    label: str
    certified: bool = False
    recipe: dict = field(default_factory=dict)
    scale: float = 1.0
    terms: tuple = ()  # (c, g) pairs when G = sum c(t) g(p)

    def __call__(self, t, p):
        return self.scale * np.broadcast_to(self.func(t, np.atleast_2d(p)), (np.atleast_2d(p).shape[0],))

    def on_lift(self, lift: PathLift) -> np.ndarray:
        """``G(t_i, iota_{t_i}(node))``, shape ``(T, N)``."""
        if self.terms:
            T, N = lift.ntimes, lift.grid.size
            flat = lift.images.reshape(T * N, -1)
            out = np.zeros((T, N))
            for c, g in self.terms:
                out += np.asarray(c(lift.tgrid), dtype=float)[:, None] * g(flat).reshape(T, N)
            return self.scale * out
        return np.stack([self(t, im) for t, im in zip(lift.tgrid, lift.images)])

    def time_mean(self, p) -> np.ndarray:
        """Adaptive quadrature of ``int_0^1 G(t, p) dt``."""
        p = np.atleast_2d(p)
        res, _ = integrate.quad_vec(lambda t: self(t, p), 0.0, 1.0, epsabs=1e-13, epsrel=1e-12)
        return res

    def rescaled(self, scale: float) -> "ProbeDirection":
        return ProbeDirection(self.func, self.family, self.label, self.certified,
                              dict(self.recipe, scale=self.scale * scale), self.scale * scale, self.terms)


class CanonicalProbe(ProbeDirection):
    """``G(t, p) = H(t, p) - int_0^1 H(tau, p) d tau``."""

    def __init__(self, H, label: str = "canonical", recipe: dict | None = None, scale: float = 1.0):
        self.H = H
        self._knots = getattr(H, "time_knots", None)
        self._zero = bool(getattr(H, "autonomous", False))
        super().__init__(self._eval, "canonical", label, True, recipe or {"family": "canonical"}, scale)

    def _mean(self, p):
        if self._zero:
            return None
        if hasattr(self.H, "time_mean"):
            return self.H.time_mean(p)
        res, _ = integrate.quad_vec(lambda t: np.asarray(self.H(t, p), dtype=float), 0.0, 1.0,
                                    epsabs=1e-13, epsrel=1e-12)
        return res

    def _eval(self, t, p):
        if self._zero:
            return np.zeros(p.shape[0])
        return np.asarray(self.H(t, p), dtype=float) - self._mean(p)

    def on_lift(self, lift: PathLift) -> np.ndarray:
        T, N = lift.ntimes, lift.grid.size
        if self._zero:
            return np.zeros((T, N))
        flat = lift.images.reshape(T * N, -1)
        mean = self._mean(flat).reshape(T, N)
        vals = np.stack([np.asarray(self.H(t, im), dtype=float) for t, im in zip(lift.tgrid, lift.images)])
        return self.scale * (vals - mean)

    def time_mean(self, p) -> np.ndarray:
        p = np.atleast_2d(p)
        if self._zero:
            return np.zeros(p.shape[0])
        if self._knots is not None:
            vals = np.stack([self(t, p) for t in self._knots])
            return np.array([trapezoid(col, self._knots) for col in vals.T])
        return super().time_mean(p)

    def rescaled(self, scale: float) -> "CanonicalProbe":
        return CanonicalProbe(self.H, self.label, dict(self.recipe, scale=self.scale * scale), self.scale * scale)


def make_probe_separable(c: Callable, g: Callable, label: str = "separable",
                         recipe: dict | None = None) -> ProbeDirection:
    """``G(t, p) = c(t) g(p)``; rejects profiles whose time mean is not zero."""
    with warnings.catch_warnings():
        # exact zeros of trigonometric profiles trigger spurious roundoff warnings
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        mean, _ = integrate.quad(lambda t: float(c(t)), 0.0, 1.0, epsabs=1e-14, limit=200)
    if abs(mean) > PROBE_MEAN_TOL:
        raise ProbeError(f"time profile has mean {mean:.3g}; probes need zero time mean")
    return ProbeDirection(lambda t, p: c(t) * g(p), "separable", label, True, recipe or {}, terms=((c, g),))


def canonical_probe(H) -> CanonicalProbe:
    return CanonicalProbe(H)


def membership_residual(probe: ProbeDirection, points) -> float:
    """``max |int_0^1 G(t, p) dt|`` over the given ambient points."""
    return float(np.abs(probe.time_mean(points)).max())


class _RandomSpatial:
    """Smooth random function on the ambient manifold (phase invariant on CP^n)."""

    def __init__(self, kind: ManifoldKind, rng: np.random.Generator, terms: int = 3):
        self.kind = kind
        if isinstance(kind, Projective):
            a = rng.normal(size=(kind.dim, kind.dim)) + 1j * rng.normal(size=(kind.dim, kind.dim))
            self.A = (a + a.conj().T) / 2
        else:
            if isinstance(kind, Torus):
                self.k = 2 * np.pi * rng.integers(-2, 3, size=(terms, kind.dim))
            else:
                self.k = rng.normal(scale=1.5, size=(terms, kind.dim))
            self.phase = rng.uniform(0, 2 * np.pi, size=terms)
            self.amp = rng.normal(size=terms)

    def __call__(self, p):
        p = np.atleast_2d(p)
        if isinstance(self.kind, Projective):
            return np.real(np.einsum("ni,ij,nj->n", p.conj(), self.A, p))
        return np.sin(p @ self.k.T + self.phase) @ self.amp


class _RandomProfile:
    def __init__(self, rng: np.random.Generator, modes: int = 3):
        self.a = rng.normal(size=modes)
        self.b = rng.normal(size=modes)
        self.j = np.arange(1, modes + 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        w = 2 * np.pi * self.j * t
        return np.sum(self.a * np.cos(w) + self.b * np.sin(w), axis=-1)


def random_probe(kind: ManifoldKind, rng: np.random.Generator, label: str = "random",
                 terms: int = 2) -> ProbeDirection:
    """Sum of ``terms`` random separable zero-mean directions."""
    parts = [(_RandomProfile(rng), _RandomSpatial(kind, rng)) for _ in range(terms)]
    for c, _ in parts:
        make_probe_separable(c, lambda p: 0.0)

    def func(t, p):
        return sum(c(t) * g(p) for c, g in parts)

    return ProbeDirection(func, "separable", label, True, {"family": "random", "label": label},
                          terms=tuple(parts))


def bump_probe(kind: ManifoldKind, centre, radius: float, profile: TimeProfile, label: str) -> ProbeDirection:
    bump = Bump(kind, np.asarray(centre), radius)
    recipe = {"family": "bump", "centre": np.asarray(centre), "radius": radius,
              "profile": profile.kind, "freq": profile.freq, "width": profile.width}
    return make_probe_separable(profile, bump, label, recipe)


# ---------------------------------------------------------------------------
# length functions


def _distinct(lift: PathLift) -> np.ndarray | slice:
    """Node subset with distinct images (antipodal duplicates dropped)."""
    ap = lift.grid.antipode
    if ap is None:
        return slice(None)
    return np.flatnonzero(np.arange(lift.grid.size) < ap)


def _values_of(G, lift):
    if isinstance(G, ProbeDirection):
        return G.on_lift(lift)
    return np.asarray(G, dtype=float)


def probe_length_function(h, lift: PathLift, G, sgrid) -> np.ndarray:
    """``u(s) = || h - s G o iota_t ||`` on ``sgrid``."""
    hv = h.values if isinstance(h, AssociatedFunction) else np.asarray(h, dtype=float)
    gv = _values_of(G, lift)
    keep = _distinct(lift)
    hv, gv = hv[:, keep], gv[:, keep]
    out = np.empty(len(sgrid))
    for i, s in enumerate(np.asarray(sgrid, dtype=float)):
        w = hv - s * gv
        out[i] = trapezoid(w.max(axis=1) - w.min(axis=1), lift.tgrid)
    return out


def convex_majorant_check(h, lift: PathLift, G, K, sgrid) -> tuple[float, float]:
    """``sup_s |l(s) - u(s)| / s^2`` for ``F(s) = s G + s^2 K`` and the bound ``||K o iota||``."""
    sgrid = np.asarray(sgrid, dtype=float)
    if np.any(sgrid == 0):
        raise ValueError("sgrid must exclude 0")
    hv = h.values if isinstance(h, AssociatedFunction) else np.asarray(h, dtype=float)
    gv, kv = _values_of(G, lift), _values_of(K, lift)
    ratio = 0.0
    for s in sgrid:
        l = hofer_norm(hv - s * gv - s * s * kv, lift.tgrid)
        u = hofer_norm(hv - s * gv, lift.tgrid)
        ratio = max(ratio, abs(l - u) / (s * s))
    return ratio, hofer_norm(kv, lift.tgrid)


# ---------------------------------------------------------------------------
# descent search


@dataclass(frozen=True)
class ProbeSummary:
    id: str
    s_star: float
    decrease: float

    def to_dict(self) -> dict:
        return {"id": self.id, "s_star": self.s_star, "decrease": self.decrease}


@dataclass(eq=False)
class DescentResult:
    probe: ProbeDirection | None
    s_star: float
    decrease: float
    u0: float
    summaries: list

    @property
    def best_id(self) -> str | None:
        return None if self.probe is None else self.probe.label


def _evaluate(probe, h, lift, sgrid, u0, target):
    """Normalize a library probe and find its best step; returns (scaled probe, summary)."""
    gv = probe.on_lift(lift)
    peak = float(np.abs(gv).max())
    if probe.label != "canonical" and peak > 0.0 and target > 0.0:
        probe = probe.rescaled(target / peak)
        gv = gv * (target / peak)
    i, ui = _convex_grid_min(h, lift, gv, sgrid)
    return probe, ProbeSummary(probe.label, float(sgrid[i]), float(u0 - ui))


def _convex_grid_min(h, lift, gv, sgrid) -> tuple[int, float]:
    """Minimum of the convex sequence ``u(sgrid)`` by bisection on its slope.

    Ties and rounding-level plateaus resolve to the leftmost index found;
    the returned value is within rounding of ``min(u)``.
    """
    keep = _distinct(lift)
    hv = h.values[:, keep]
    gk = gv[:, keep]
    cache = {}

    def u(i):
        if i not in cache:
            w = hv - sgrid[i] * gk
            cache[i] = trapezoid(w.max(axis=1) - w.min(axis=1), lift.tgrid)
        return cache[i]

    lo, hi = 0, len(sgrid) - 1
    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if u(m1) <= u(m2):
            hi = m2
        else:
            lo = m1
    best = min(range(lo, hi + 1), key=lambda i: (u(i), i))
    zero = np.flatnonzero(sgrid == 0.0)
    if zero.size and u(int(zero[0])) <= u(best):
        best = int(zero[0])
    return best, u(best)


def probe_library(lift: PathLift, H, h: AssociatedFunction, budget: int = 200, seed: int = 0,
                  extension: bool = True) -> list[ProbeDirection]:
    """Fixed-order probe list: canonical, extension-canonical, bumps, then random fill."""
    kind = lift.kind
    probes: list[ProbeDirection] = [canonical_probe(H)]
    if extension and not isinstance(kind, Projective):
        probes.append(extension_probe(lift, h))
    times = np.unique(np.round(np.linspace(0, lift.ntimes - 1, 6)).astype(int))
    ref = lift.images[0, int(np.argmax(h.values[0]))]
    diam = float(geom.distance_raw(kind, ref, lift.images[0]).max()) or 1.0
    profiles = [TimeProfile("square"), TimeProfile("cos"), TimeProfile("sin"), TimeProfile("cos", 2)]
    for ti in times:
        for side, node in (("max", int(np.argmax(h.values[ti]))), ("min", int(np.argmin(h.values[ti])))):
            centre = lift.images[ti, node]
            for frac in (0.15, 0.3, 0.6):
                for prof in profiles:
                    label = f"bump-{side}-t{lift.tgrid[ti]:.2f}-r{frac}-{prof.kind}{prof.freq}"
                    probes.append(bump_probe(kind, centre, frac * diam, prof, label))
    rng = np.random.default_rng(seed)
    k = 0
    while len(probes) < budget:
        probes.append(random_probe(kind, rng, label=f"random-{k}"))
        k += 1
    probes = probes[:budget]
    return probes


def extension_probe(lift: PathLift, h: AssociatedFunction, max_knots: int = 11) -> CanonicalProbe:
    """Canonical direction built from the tubular extension of ``h`` along the path."""
    stride = max(1, int(np.ceil((lift.ntimes - 1) / (max_knots - 1))))
    knots = np.unique(np.append(np.arange(0, lift.ntimes, stride), lift.ntimes - 1))
    ext = PathExtension(lift, h.values, knots)
    return CanonicalProbe(ext, label="extension-canonical",
                          recipe={"family": "extension-canonical", "max_knots": max_knots})


def descent_search(lift: PathLift, H, h: AssociatedFunction | None = None, budget: int = 200,
                   sgrid=None, seed: int = 0, extension: bool = True,
                   probes: list | None = None) -> DescentResult:
    """Largest decrease ``u(0) - min_s u(s)`` over the probe library.

    Every probe except the canonical one is rescaled so that ``max |G o iota|``
    equals the mean oscillation of ``h``; the rescaled probe is what the
    result records.
    """
    h = associated_function_from_H(lift, H) if h is None else h
    sgrid = default_sgrid() if sgrid is None else np.asarray(sgrid, dtype=float)
    u0 = hofer_norm(h, lift.tgrid)
    target = float(oscillation(h.values).mean())
    probes = probe_library(lift, H, h, budget, seed, extension) if probes is None else probes

    def job(p):
        return _evaluate(p, h, lift, sgrid, u0, target)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, probes))
    else:
        results = [job(p) for p in probes]
    probes = [r[0] for r in results]
    summaries = [r[1] for r in results]
    best = int(np.argmax([s.decrease for s in summaries])) if summaries else None
    if best is None:
        return DescentResult(None, 0.0, 0.0, u0, [])
    return DescentResult(probes[best], summaries[best].s_star, summaries[best].decrease, u0, summaries)


def verify_certificate(lift: PathLift, h: AssociatedFunction, probe: ProbeDirection, s_star: float) -> float:
    """Recompute ``u(0) - u(s*)`` from scratch."""
    u = probe_length_function(h, lift, probe, [0.0, s_star])
    return float(u[0] - u[1])


def rebuild_probe(recipe: dict, lift: PathLift, H, h: AssociatedFunction, kind: ManifoldKind) -> ProbeDirection:
    """Reconstruct a library probe from its stored recipe."""
    fam = recipe.get("family")
    scale = recipe.get("scale", 1.0)
    if fam == "bump":
        prof = TimeProfile(recipe["profile"], recipe["freq"], recipe["width"])
        probe = bump_probe(kind, np.asarray(recipe["centre"]), recipe["radius"], prof, "rebuilt")
    elif fam == "extension-canonical":
        probe = extension_probe(lift, h, recipe["max_knots"])
    elif fam == "canonical":
        probe = canonical_probe(H)
    else:
        raise ProbeError(f"cannot rebuild probe family {fam!r}")
    return probe.rescaled(scale) if scale != 1.0 else probe


# ---------------------------------------------------------------------------
# verdict


@dataclass(eq=False)
class CriticalityReport:
    verdict: str
    reason: str
    tolerances: Tolerances
    track: ExtremaTrack | None = None
    persistence: Persistence | None = None
    descent: DescentResult | None = None
    hofer: float = 0.0

    @property
    def p_plus(self) -> np.ndarray:
        return self.persistence.plus_points if self.persistence else np.empty((0,))

    @property
    def p_minus(self) -> np.ndarray:
        return self.persistence.minus_points if self.persistence else np.empty((0,))

    @property
    def certificate(self) -> ProbeSummary | None:
        d = self.descent
        if d is None or d.probe is None or d.decrease <= self.tolerances.tol_probe:
            return None
        return ProbeSummary(d.probe.label, d.s_star, d.decrease)

    def to_dict(self) -> dict:
        per = self.persistence
        d = self.descent
        cert = self.certificate
        out = {
            "verdict": self.verdict,
            "reason": self.reason,
            "hofer_norm": self.hofer,
            "p_plus": _points(per.plus_points if per else []),
            "p_minus": _points(per.minus_points if per else []),
            "drift": {
                "plus": [] if per is None else per.plus_drift.tolist(),
                "minus": [] if per is None else per.minus_drift.tolist(),
            },
            "probes": [] if d is None else [s.to_dict() for s in d.summaries],
            "certificate": None if cert is None else dict(cert.to_dict(), recipe=_jsonable(d.probe.recipe)),
            "tolerances": self.tolerances.to_dict(),
        }
        return out


def _points(pts) -> list:
    arr = np.asarray(pts)
    if np.iscomplexobj(arr):
        return np.stack([arr.real, arr.imag], axis=-1).tolist()
    return arr.tolist()


def _jsonable(recipe: dict) -> dict:
    return {k: (_points(v) if isinstance(v, np.ndarray) else v) for k, v in recipe.items()}


def is_regular(h: AssociatedFunction) -> bool:
    osc = oscillation(h.values)
    return bool(osc.min() > 1e-9 * max(1.0, float(np.abs(h.values).max())))


def quasi_autonomy_verdict(lift: PathLift, H, tols: Tolerances | None = None, budget: int = 200,
                           seed: int = 0, sgrid=None, check: bool = True,
                           extension: bool = True) -> CriticalityReport:
    """Critical / non-critical / inconclusive verdict with candidates and probe evidence."""
    h = associated_function_from_H(lift, H)
    if check and lift.ntimes > 1:
        worst, allowed = consistency_deviation(lift, h)
        if worst > allowed:
            raise InconsistentPathError(
                f"lift is not generated by {getattr(H, 'label', 'H')}: deviation {worst:.3g} > {allowed:.3g}"
            )
    norm = hofer_norm(h, lift.tgrid)
    if not is_regular(h):
        tols = tols or Tolerances(0.0, 2.0 * max(_spacing(lift, i) for i in range(lift.ntimes)), 0.0)
        return CriticalityReport("inconclusive", "non-regular: velocity vanishes at some time", tols, hofer=norm)
    tols = tols or Tolerances.for_path(lift, h)
    track = ExtremaTrack.build(h, tols.tol_val, tols.tol_geo)
    per = _persistence(lift, H, h, tols.tol_val, tols.tol_geo)
    found = per.plus_nodes.size > 0 and per.minus_nodes.size > 0
    descent = descent_search(lift, H, h, budget, sgrid, seed, extension)
    violated = descent.decrease > tols.tol_probe
    if found and not violated:
        verdict, reason = "critical", "persistent extrema on both sides; no probe shortens the path"
    elif found and violated:
        verdict, reason = "non-critical", f"probe {descent.best_id} shortens the path"
    else:
        loose = _persistence(lift, H, h, 2 * tols.tol_val, 2 * tols.tol_geo)
        if loose.plus_nodes.size and loose.minus_nodes.size and not violated:
            verdict, reason = "inconclusive", "candidates appear only at doubled tolerances"
        else:
            missing = [n for n, a in (("p+", per.plus_nodes), ("p-", per.minus_nodes)) if a.size == 0]
            reason = "no persistent " + " and ".join(missing)
            if violated:
                reason += f"; probe {descent.best_id} shortens the path"
            verdict = "non-critical"
    return CriticalityReport(verdict, reason, tols, track, per, descent, norm)
