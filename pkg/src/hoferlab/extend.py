"""Extrema-preserving extension of functions on a Lagrangian to the ambient space.

Given node values ``h`` on a mesh of ``L_t`` with positive maximum and negative
minimum, the extension is

    H(exp_x(v)) = alpha(|v|^2) * h(x) * (1 - |v|^2),     v normal at x,

and ``H = 0`` away from the tube.  ``alpha`` equals 1 for ``|v|^2 <= eps/2``
and vanishes for ``|v|^2 >= eps``, so the tube radius is ``sqrt(eps)``.
Off the mesh ``|H|`` strictly decreases, hence the ambient extrema are the
mesh extrema.  Only the flat backends are supported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import geom
from .geom import Projective, Torus
from .lagr import LagrangianMesh, PathLift, _tangent_bases, mesh_separation


class ExtensionError(ValueError):
    pass


def smoothstep(x: np.ndarray) -> np.ndarray:
    """C^2 quintic step, 0 at ``x <= 0`` and 1 at ``x >= 1``."""
    x = np.clip(x, 0.0, 1.0)
    return np.clip(x ** 3 * (10 - 15 * x + 6 * x ** 2), 0.0, 1.0)


@dataclass(frozen=True)
class BumpProfile:
    """``alpha(tau)`` in the squared normal norm ``tau``; plateau ``eps/2``, support ``eps``."""

    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ExtensionError("bump threshold eps must lie in (0, 1) so that 1 - |v|^2 > 0")

    @property
    def radius(self) -> float:
        return float(np.sqrt(self.eps))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        half = self.eps / 2
        return 1.0 - smoothstep((tau - half) / half)


def normalize_for_extension(values) -> tuple[np.ndarray, float]:
    """Shift so that max > 0 > min (midrange to zero); constants become 0.

    Returns ``(shifted, shift)`` with ``shifted = values + shift``.
    """
    v = np.asarray(values, dtype=float)
    hi, lo = v.max(), v.min()
    if hi - lo <= 1e-14 * max(1.0, abs(hi), abs(lo)):
        return np.zeros_like(v), -float(hi)
    shift = -(hi + lo) / 2
    return v + shift, float(shift)


def _check_backend(kind):
    if isinstance(kind, Projective):
        raise ExtensionError("tubular extension is only available on Euclidean and torus backends")


class _NearestNode:
    """Nearest-node lookup; ties go to the smaller node index."""

    def __init__(self, mesh: LagrangianMesh):
        self.kind = mesh.kind
        box = 1.0 if isinstance(mesh.kind, Torus) else None
        self.tree = cKDTree(mesh.images, boxsize=box)

    def __call__(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = np.atleast_2d(p)
        if isinstance(self.kind, Torus):
            p = geom.reduce_point(self.kind, p)
        dist, idx = self.tree.query(p, k=2)
        tie = np.isclose(dist[:, 0], dist[:, 1], rtol=0, atol=1e-15) & (idx[:, 1] < idx[:, 0])
        return np.where(tie, dist[:, 1], dist[:, 0]), np.where(tie, idx[:, 1], idx[:, 0])


@dataclass(eq=False)
class AmbientExtension:
    """Evaluator of the tubular extension of one time slice."""

    mesh: LagrangianMesh
    values: np.ndarray
    bump: BumpProfile
    shift: float = 0.0

    def __post_init__(self):
        self._nearest = _NearestNode(self.mesh)
        self._basis = _tangent_bases(self.mesh)

    def normal_sq(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nearest node, its distance, and squared normal part of ``p - x``."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        dist, idx = self._nearest(p)
        d = geom.displacement(self.mesh.kind, self.mesh.images[idx], p)
        tang = np.einsum("ikd,id->ik", self._basis[idx], d)
        tau = np.maximum(np.sum(d ** 2, axis=-1) - np.sum(tang ** 2, axis=-1), 0.0)
        return idx, dist, tau

    def __call__(self, p) -> np.ndarray:
        idx, dist, tau = self.normal_sq(p)
        val = self.bump(tau) * self.values[idx] * (1.0 - tau)
        return np.where(dist < self.bump.radius, val, 0.0)


def tubular_extension(mesh: LagrangianMesh, values, bump: BumpProfile,
                      separation: float | None = None) -> AmbientExtension:
    """Extension of node values ``values`` (already normalized) off the mesh."""
    _check_backend(mesh.kind)
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.grid.size,):
        raise ExtensionError("one value per mesh node is required")
    sep = mesh_separation(mesh) if separation is None else separation
    if bump.radius > sep:
        raise ExtensionError(f"tube radius {bump.radius:.3g} exceeds mesh separation {sep:.3g}")
    return AmbientExtension(mesh, values, bump)


def tube_cloud(mesh: LagrangianMesh, bump: BumpProfile, count: int, seed: int = 0,
               margin: float = 1.5) -> np.ndarray:
    """Random ambient points covering the tube (and ``margin`` times its radius), plus the nodes."""
    _check_backend(mesh.kind)
    rng = np.random.default_rng(seed)
    n_rand = max(count - mesh.grid.size, 0)
    idx = rng.integers(0, mesh.grid.size, size=n_rand)
    basis = _tangent_bases(mesh)[idx]
    raw = rng.normal(size=(n_rand, mesh.kind.dim))
    tang = np.einsum("ikd,id->ik", basis, raw)
    normal = raw - np.einsum("ik,ikd->id", tang, basis)
    normal /= np.maximum(np.linalg.norm(normal, axis=-1, keepdims=True), 1e-300)
    r = margin * bump.radius * np.sqrt(rng.random(n_rand))[:, None]
    spacing = mesh.spacing()
    jitter = np.einsum("ik,ikd->id", rng.uniform(-0.5, 0.5, size=tang.shape) * spacing, basis)
    pts = mesh.images[idx] + r * normal + jitter
    return geom.reduce_point(mesh.kind, np.concatenate([mesh.images, pts]))


@dataclass(frozen=True)
class ExtremaCheck:
    cloud_max: float
    cloud_min: float
    mesh_max: float
    mesh_min: float
    max_margin: float
    min_margin: float
    tol_geo: float
    degenerate: bool

    @property
    def ok(self) -> bool:
        if self.degenerate:
            return self.cloud_max == 0.0 and self.cloud_min == 0.0
        return (self.max_margin <= self.tol_geo and self.min_margin <= self.tol_geo
                and self.cloud_max <= self.mesh_max and self.cloud_min >= self.mesh_min)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def extension_extrema_check(ext: AmbientExtension, cloud, tol_val: float | None = None,
                            tol_geo: float | None = None) -> ExtremaCheck:
    """Check that near-extremal cloud points sit next to extremal mesh nodes.

    Cloud points within ``tol_val`` of the cloud max (min) are the ambient
    argmax (argmin) cluster; the margins are their largest distance to a mesh
    node within ``tol_val`` of the mesh max (min).
    """
    cloud = np.atleast_2d(np.asarray(cloud, dtype=float))
    vals = ext(cloud)
    hv = ext.values
    mmax, mmin = float(hv.max()), float(hv.min())
    degenerate = mmax == mmin
    scale = mmax - mmin
    tol_val = 1e-6 * scale if tol_val is None else tol_val
    tol_geo = 2.0 * ext.mesh.spacing() if tol_geo is None else tol_geo

    def margin(cluster_mask, node_mask):
        pts = cloud[cluster_mask]
        nodes = ext.mesh.images[node_mask]
        if pts.size == 0:
            return np.inf
        d = geom.distance_raw(ext.mesh.kind, pts[:, None, :], nodes[None, :, :])
        return float(d.min(axis=1).max())

    if degenerate:
        return ExtremaCheck(float(vals.max()), float(vals.min()), mmax, mmin, 0.0, 0.0, tol_geo, True)
    cmax, cmin = float(vals.max()), float(vals.min())
    return ExtremaCheck(
        cloud_max=cmax,
        cloud_min=cmin,
        mesh_max=mmax,
        mesh_min=mmin,
        max_margin=margin(vals >= cmax - tol_val, hv >= mmax - tol_val),
        min_margin=margin(vals <= cmin + tol_val, hv <= mmin + tol_val),
        tol_geo=tol_geo,
        degenerate=False,
    )


class PathExtension:
    """Time-dependent extension along a lift, linear in ``t`` between knots.

    ``knots`` are time indices of the lift; at knot times the extension
    restricts exactly to the normalized associated function.  A single tube
    threshold ``eps`` is used for the whole path.
    """

    def __init__(self, lift: PathLift, h: np.ndarray, knots=None, bump: BumpProfile | None = None):
        _check_backend(lift.kind)
        h = np.asarray(h, dtype=float)
        self.lift = lift
        self.knots = np.arange(lift.ntimes) if knots is None else np.asarray(knots)
        self.time_knots = lift.tgrid[self.knots]
        meshes = [lift.mesh(int(i)) for i in self.knots]
        seps = [mesh_separation(m) for m in meshes]
        if bump is None:
            radius = 0.5 * min(seps)
            bump = BumpProfile(min(radius ** 2, 0.5))
        self.bump = bump
        self.shifts = []
        self.slices = []
        for m, sep, i in zip(meshes, seps, self.knots):
            vals, shift = normalize_for_extension(h[int(i)])
            self.shifts.append(shift)
            self.slices.append(tubular_extension(m, vals, bump, separation=sep))

    def __call__(self, t: float, p) -> np.ndarray:
        tk = self.time_knots
        j = int(np.clip(np.searchsorted(tk, t, side="right") - 1, 0, tk.size - 1))
        if j == tk.size - 1 or np.isclose(t, tk[j], rtol=0, atol=1e-14):
            return self.slices[j](p)
        w = (t - tk[j]) / (tk[j + 1] - tk[j])
        return (1 - w) * self.slices[j](p) + w * self.slices[j + 1](p)

    def time_mean(self, p) -> np.ndarray:
        """Exact time integral of the piecewise-linear interpolant at ``p``."""
        vals = np.stack([s(p) for s in self.slices])
        tk = self.time_knots
        if tk.size == 1:
            return vals[0]
        w = np.zeros(tk.size)
        dt = np.diff(tk)
        w[:-1] += dt / 2
        w[1:] += dt / 2
        return np.tensordot(w, vals, axes=1)
