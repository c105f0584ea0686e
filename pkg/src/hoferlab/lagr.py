"""Sampled Lagrangian submanifolds, lifts, velocity one-forms and exactness.

A :class:`ModelGrid` discretizes the model manifold ``L`` (a circle, RP^1,
the 2-sphere or RP^2 seen as the antipodally identified sphere).  Each node
carries, for every parameter direction, a central-difference stencil
``(bwd, fwd)``; frame vectors are the parameter derivatives of the embedding
obtained from those stencils.

A :class:`PathLift` is a family of embeddings ``iota_t`` sharing one grid, so
node labels are tracked through time.  The velocity one-form is

    alpha_t(e) = omega(d iota_t / dt, e),

and the lift is exact when ``alpha_t = d h_t`` for a function ``h_t`` on the
nodes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from . import geom
from .geom import ManifoldKind, Projective, Torus

MIN_CIRCLE_SAMPLES = 64
TOL_LAG = 1e-4


class MeshError(ValueError):
    """Invalid mesh, lift or grid."""


class NotExactError(MeshError):
    """The velocity one-form has non-vanishing periods."""


# ---------------------------------------------------------------------------
# model grids


@dataclass(frozen=True, eq=False)
class ModelGrid:
    """Discretized model manifold.

    ``params`` holds the parameter coordinates of each node, ``fwd``/``bwd``
    the stencil neighbours per direction, ``step`` the parameter spacing per
    direction.  ``loops`` are closed index cycles generating H_1 with real
    coefficients; ``antipode`` (RP^2 only) pairs nodes with equal images.
    """

    model: str
    shape: tuple
    params: np.ndarray
    step: np.ndarray
    fwd: np.ndarray
    bwd: np.ndarray
    loops: tuple = ()
    antipode: np.ndarray | None = None
    offset: float = 0.0

    @property
    def size(self) -> int:
        return self.params.shape[0]

    @property
    def ndir(self) -> int:
        return self.step.shape[0]

    @classmethod
    def circle(cls, m: int, offset: float = 0.0, components: int = 1) -> "ModelGrid":
        """``components`` disjoint circles of ``m`` nodes, ``theta_j = 2 pi (j + offset) / m``."""
        return cls._loops("circle", m, 2 * np.pi, offset, components)

    @classmethod
    def rp1(cls, m: int, offset: float = 0.0) -> "ModelGrid":
        """RP^1 parametrized by ``phi in [0, pi)``."""
        return cls._loops("rp1", m, np.pi, offset, 1)

    @classmethod
    def _loops(cls, model, m, period, offset, components):
        if m < MIN_CIRCLE_SAMPLES:
            raise MeshError(f"need at least {MIN_CIRCLE_SAMPLES} samples per circle, got {m}")
        if components < 1:
            raise MeshError("need at least one component")
        j = np.arange(m)
        theta = period * (j + offset) / m
        params, fwd, bwd, loops = [], [], [], []
        for c in range(components):
            base = c * m
            params.append(np.column_stack([theta, np.full(m, c, dtype=float)]))
            fwd.append(base + (j + 1) % m)
            bwd.append(base + (j - 1) % m)
            loops.append(base + np.append(j, 0))
        return cls(
            model=model,
            shape=(components, m),
            params=np.concatenate(params)[:, :1] if components == 1 else np.concatenate(params),
            step=np.array([period / m]),
            fwd=np.concatenate(fwd)[:, None],
            bwd=np.concatenate(bwd)[:, None],
            loops=tuple(loops),
            offset=float(offset),
        )

    @classmethod
    def sphere2(cls, m_theta: int, m_phi: int, model: str = "sphere2") -> "ModelGrid":
        """Latitude/longitude grid with cell-centred latitudes (no pole nodes).

        ``theta_i = pi (i + 1/2) / m_theta``, ``phi_j = 2 pi j / m_phi``.
        Stencils cross the poles: the node beyond ``theta_0`` in the
        ``-theta`` direction is ``(theta_0, phi + pi)``.
        """
        if m_theta < MIN_CIRCLE_SAMPLES // 2 or m_phi < MIN_CIRCLE_SAMPLES or m_phi % 2:
            raise MeshError("sphere grid needs m_theta >= 32 and even m_phi >= 64")
        i, j = np.meshgrid(np.arange(m_theta), np.arange(m_phi), indexing="ij")
        i, j = i.ravel(), j.ravel()
        half = m_phi // 2

        def idx(a, b):
            return a * m_phi + b % m_phi

        theta = np.pi * (i + 0.5) / m_theta
        phi = 2 * np.pi * j / m_phi
        fwd_t = np.where(i + 1 < m_theta, idx(i + 1, j), idx(i, j + half))
        bwd_t = np.where(i > 0, idx(i - 1, j), idx(i, j + half))
        fwd_p = idx(i, j + 1)
        bwd_p = idx(i, j - 1)
        antipode = idx(m_theta - 1 - i, j + half) if model == "rp2" else None
        return cls(
            model=model,
            shape=(m_theta, m_phi),
            params=np.column_stack([theta, phi]),
            step=np.array([np.pi / m_theta, 2 * np.pi / m_phi]),
            fwd=np.column_stack([fwd_t, fwd_p]),
            bwd=np.column_stack([bwd_t, bwd_p]),
            antipode=antipode,
        )

    @classmethod
    def rp2(cls, m_theta: int, m_phi: int) -> "ModelGrid":
        return cls.sphere2(m_theta, m_phi, model="rp2")

    def edges(self) -> np.ndarray:
        """Unique undirected stencil edges, shape ``(E, 2)``."""
        a = np.repeat(np.arange(self.size), self.ndir)
        b = self.fwd.ravel()
        pairs = np.sort(np.column_stack([a, b]), axis=1)
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        return np.unique(pairs, axis=0)

    def neighbours(self) -> np.ndarray:
        """Stencil neighbours of each node, shape ``(N, 2 * ndir)``."""
        return np.concatenate([self.fwd, self.bwd], axis=1)

    def relabel(self, perm: np.ndarray) -> "ModelGrid":
        """Grid whose node ``i`` is the old node ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(perm.size)
        return ModelGrid(
            model=self.model,
            shape=self.shape,
            params=self.params[perm],
            step=self.step,
            fwd=inv[self.fwd[perm]],
            bwd=inv[self.bwd[perm]],
            loops=tuple(inv[loop] for loop in self.loops),
            antipode=None if self.antipode is None else inv[self.antipode[perm]],
            offset=self.offset,
        )

    def to_dict(self) -> dict:
        d = {"model": self.model, "shape": list(self.shape), "offset": self.offset}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelGrid":
        model, shape = d["model"], d["shape"]
        if model == "circle":
            return cls.circle(shape[1], d.get("offset", 0.0), components=shape[0])
        if model == "rp1":
            return cls.rp1(shape[1], d.get("offset", 0.0))
        if model in ("sphere2", "rp2"):
            return cls.sphere2(shape[0], shape[1], model=model)
        raise MeshError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# meshes and lifts


def _frames(kind: ManifoldKind, grid: ModelGrid, images: np.ndarray) -> np.ndarray:
    """Frame vectors ``d iota / d param`` per node and direction, shape ``(..., N, d, D)``."""
    centre = images[..., :, None, :]
    fwd = geom.displacement(kind, centre, images[..., grid.fwd, :])
    bwd = geom.displacement(kind, centre, images[..., grid.bwd, :])
    return (fwd - bwd) / (2.0 * grid.step[:, None])


def lagrangian_defect(kind: ManifoldKind, grid: ModelGrid, images: np.ndarray) -> float:
    """``max |omega(u, v)| / (|u| |v|)`` over nodes and frame pairs."""
    if grid.ndir < 2:
        return 0.0
    fr = _frames(kind, grid, images)
    norms = np.sqrt(np.maximum(geom.metric_raw(kind, fr, fr), 0.0))
    worst = 0.0
    for a in range(grid.ndir):
        for b in range(a + 1, grid.ndir):
            w = np.abs(geom.omega_raw(kind, fr[..., a, :], fr[..., b, :]))
            denom = norms[..., a] * norms[..., b]
            ratio = np.where(denom > 0, w / np.where(denom > 0, denom, 1.0), 0.0)
            worst = max(worst, float(ratio.max()))
    return worst


@dataclass(frozen=True, eq=False)
class LagrangianMesh:
    kind: ManifoldKind
    grid: ModelGrid
    images: np.ndarray
    tol_lag: float = TOL_LAG

    def __post_init__(self):
        images = geom.reduce_point(self.kind, np.asarray(self.images, dtype=self.kind.dtype))
        if images.shape != (self.grid.size, self.kind.dim):
            raise MeshError(f"images have shape {images.shape}, expected {(self.grid.size, self.kind.dim)}")
        object.__setattr__(self, "images", images)
        defect = lagrangian_defect(self.kind, self.grid, images)
        if defect > self.tol_lag:
            raise MeshError(f"mesh is not Lagrangian at mesh scale (defect {defect:.3g})")

    @property
    def frames(self) -> np.ndarray:
        return _frames(self.kind, self.grid, self.images)

    def spacing(self) -> float:
        """Largest ambient distance between stencil neighbours."""
        nb = self.grid.neighbours()
        d = geom.distance_raw(self.kind, self.images[:, None, :], self.images[nb])
        return float(d.max())

    def check_embedded(self) -> float:
        """Minimum image distance between non-neighbour, non-identified nodes."""
        n = self.grid.size
        excluded = np.zeros((n, n), dtype=bool)
        excluded[np.arange(n), np.arange(n)] = True
        nb = self.grid.neighbours()
        excluded[np.repeat(np.arange(n), nb.shape[1]), nb.ravel()] = True
        if self.grid.antipode is not None:
            excluded[np.arange(n), self.grid.antipode] = True
        d = geom.distance_raw(self.kind, self.images[:, None, :], self.images[None, :, :])
        return float(np.where(excluded, np.inf, d).min())


def _pathlift_images(kind, grid, images):
    images = geom.reduce_point(kind, np.asarray(images, dtype=kind.dtype))
    if images.ndim != 3 or images.shape[1:] != (grid.size, kind.dim):
        raise MeshError(f"lift images have shape {images.shape}")
    return images


@dataclass(frozen=True, eq=False)
class PathLift:
    """Time-indexed embeddings ``iota_t`` of one model grid."""

    kind: ManifoldKind
    grid: ModelGrid
    tgrid: np.ndarray
    images: np.ndarray
    tol_lag: float = TOL_LAG
    check: bool = True

    def __post_init__(self):
        tgrid = np.asarray(self.tgrid, dtype=float)
        if tgrid.ndim != 1 or tgrid.size < 1:
            raise MeshError("tgrid must be a nonempty 1-d array")
        if np.any(np.diff(tgrid) <= 0):
            raise MeshError("tgrid must be strictly increasing")
        if tgrid.size > 1 and (tgrid[0] != 0.0 or tgrid[-1] != 1.0):
            raise MeshError("tgrid must start at 0 and end at 1")
        images = _pathlift_images(self.kind, self.grid, self.images)
        if images.shape[0] != tgrid.size:
            raise MeshError("one mesh per time sample is required")
        object.__setattr__(self, "tgrid", tgrid)
        object.__setattr__(self, "images", images)
        if self.check:
            defect = max(lagrangian_defect(self.kind, self.grid, im) for im in images)
            if defect > self.tol_lag:
                raise MeshError(f"lift leaves the Lagrangian condition (defect {defect:.3g})")

    @property
    def ntimes(self) -> int:
        return self.tgrid.size

    def mesh(self, ti: int) -> LagrangianMesh:
        return LagrangianMesh(self.kind, self.grid, self.images[ti], self.tol_lag)

    def relabel(self, perm) -> "PathLift":
        perm = np.asarray(perm)
        return PathLift(self.kind, self.grid.relabel(perm), self.tgrid, self.images[:, perm],
                        self.tol_lag, check=False)

    @classmethod
    def constant(cls, mesh: LagrangianMesh, tgrid) -> "PathLift":
        tgrid = np.asarray(tgrid, dtype=float)
        images = np.broadcast_to(mesh.images, (tgrid.size,) + mesh.images.shape).copy()
        return cls(mesh.kind, mesh.grid, tgrid, images, mesh.tol_lag, check=False)

    @classmethod
    def from_map(cls, kind, grid, tgrid, embedding, tol_lag=TOL_LAG) -> "PathLift":
        """Lift from an explicit map ``embedding(t, params) -> images``."""
        tgrid = np.asarray(tgrid, dtype=float)
        images = np.stack([embedding(t, grid.params) for t in tgrid])
        return cls(kind, grid, tgrid, images, tol_lag)


@dataclass(frozen=True, eq=False)
class AssociatedFunction:
    """Samples ``h(t_i, node)``; ``normalization`` is ``"raw"`` or ``"mean-zero"``."""

    values: np.ndarray
    normalization: str = "raw"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise MeshError("associated function has non-finite values")
        object.__setattr__(self, "values", values)

    def mean_zero(self) -> "AssociatedFunction":
        v = self.values - self.values.mean(axis=-1, keepdims=True)
        return AssociatedFunction(v, "mean-zero")


# ---------------------------------------------------------------------------
# velocities and one-forms


def _time_difference(kind, tgrid, images, ti):
    """d iota / dt at time index ``ti`` by centred (one-sided at ends) differences."""
    nt = tgrid.size
    if nt < 2:
        raise MeshError("a single-time lift has no time derivative")
    lo, hi = max(ti - 1, 0), min(ti + 1, nt - 1)
    centre = images[ti]
    d_hi = geom.displacement(kind, centre, images[hi]) if hi != ti else 0.0
    d_lo = geom.displacement(kind, centre, images[lo]) if lo != ti else 0.0
    return (d_hi - d_lo) / (tgrid[hi] - tgrid[lo])


def velocities(lift: PathLift, ti: int | None = None) -> np.ndarray:
    """Node velocities ``d iota_t / dt``; shape ``(N, D)`` or ``(T, N, D)``."""
    if ti is not None:
        return _time_difference(lift.kind, lift.tgrid, lift.images, ti)
    return np.stack([_time_difference(lift.kind, lift.tgrid, lift.images, i) for i in range(lift.ntimes)])


def velocity_one_form(lift: PathLift, ti: int) -> np.ndarray:
    """``alpha_t(e_d) = omega(d iota / dt, e_d)`` per node and frame direction, shape ``(N, d)``."""
    v = velocities(lift, ti)
    fr = _frames(lift.kind, lift.grid, lift.images[ti])
    return geom.omega_raw(lift.kind, v[:, None, :], fr)


def associated_function_from_H(lift: PathLift, H) -> AssociatedFunction:
    """``h(t_i, node) = H(t_i, iota_{t_i}(node))``."""
    vals = np.stack([np.broadcast_to(H(t, im), (lift.grid.size,)) for t, im in zip(lift.tgrid, lift.images)])
    return AssociatedFunction(vals)


def edge_differential(grid: ModelGrid, values: np.ndarray) -> np.ndarray:
    """Central differences of node values along each stencil direction."""
    return (values[..., grid.fwd] - values[..., grid.bwd]) / (2.0 * grid.step)


def _edge_integrals(lift: PathLift, ti: int, edges: np.ndarray) -> np.ndarray:
    """Trapezoid integral of ``alpha_t`` along the chord of each edge ``a -> b``."""
    kind, im = lift.kind, lift.images[ti]
    v = velocities(lift, ti)
    a, b = edges[:, 0], edges[:, 1]
    chord_a = geom.displacement(kind, im[a], im[b])
    chord_b = -geom.displacement(kind, im[b], im[a])
    return 0.5 * (geom.omega_raw(kind, v[a], chord_a) + geom.omega_raw(kind, v[b], chord_b))


def exactness_periods(lift: PathLift, ti: int) -> np.ndarray:
    """Discrete loop integrals of ``alpha_t`` over the grid's H_1 generators."""
    out = []
    for loop in lift.grid.loops:
        edges = np.column_stack([loop[:-1], loop[1:]])
        out.append(_edge_integrals(lift, ti, edges).sum())
    return np.array(out)


def _loop_lengths(lift: PathLift, ti: int) -> list[float]:
    im = lift.images[ti]
    out = []
    for loop in lift.grid.loops:
        out.append(float(geom.distance_raw(lift.kind, im[loop[:-1]], im[loop[1:]]).sum()))
    return out


def alpha_sup(lift: PathLift, ti: int) -> float:
    """Sup norm of ``alpha_t`` with respect to the ambient metric on frames."""
    al = velocity_one_form(lift, ti)
    fr = _frames(lift.kind, lift.grid, lift.images[ti])
    norms = np.sqrt(np.maximum(geom.metric_raw(lift.kind, fr, fr), 1e-300))
    return float(np.abs(al / norms).max())


def period_tolerance(lift: PathLift, ti: int, rel: float = 1e-2) -> float:
    lengths = _loop_lengths(lift, ti) or [_tree_scale(lift, ti)]
    return rel * alpha_sup(lift, ti) * max(lengths)


def _tree_scale(lift: PathLift, ti: int) -> float:
    """Rough diameter of the mesh, used when there are no generator loops."""
    im = lift.images[ti]
    d = geom.distance_raw(lift.kind, im[0], im)
    return float(2 * np.pi * max(d.max(), 1e-12))


def recover_h_from_alpha(lift: PathLift, ti: int, basepoint: int = 0,
                         tol_period: float | None = None) -> np.ndarray:
    """Primitive of ``alpha_t`` by integration along a spanning tree of grid edges.

    Returns node values normalized to 0 at ``basepoint``.  Raises
    :class:`NotExactError` when a generator period or a non-tree edge
    residual exceeds ``tol_period``.
    """
    tol = period_tolerance(lift, ti) if tol_period is None else tol_period
    periods = exactness_periods(lift, ti)
    if np.any(np.abs(periods) > tol):
        raise NotExactError(f"velocity one-form has periods {periods} (tol {tol:.3g})")
    grid = lift.grid
    edges = grid.edges()
    n = grid.size
    integrals = _edge_integrals(lift, ti, edges)
    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    order, pred = breadth_first_order(adj, basepoint, directed=False, return_predecessors=True)
    if order.size != n:
        raise MeshError("grid is disconnected; pick one component per call")
    lookup = {(int(a), int(b)): k for k, (a, b) in enumerate(edges)}
    h = np.zeros(n)
    for node in order[1:]:
        parent = int(pred[node])
        key = (min(parent, node), max(parent, node))
        val = integrals[lookup[key]]
        h[node] = h[parent] + (val if parent < node else -val)
    residual = h[edges[:, 1]] - h[edges[:, 0]] - integrals
    if np.any(np.abs(residual) > tol):
        raise NotExactError(f"path dependence {np.abs(residual).max():.3g} exceeds {tol:.3g}")
    return h


def consistency_deviation(lift: PathLift, h: AssociatedFunction) -> tuple[float, float]:
    """Compare ``alpha_t`` with the edge differential of ``h``.

    Returns ``(max |alpha - dh|, allowed)`` where the allowance is
    ``5 (dt + spacing) * scale``; a lift generated by ``H`` with ``h = H o iota``
    stays well inside it.
    """
    worst, scale = 0.0, 0.0
    for ti in range(lift.ntimes):
        al = velocity_one_form(lift, ti)
        dh = edge_differential(lift.grid, h.values[ti])
        worst = max(worst, float(np.abs(al - dh).max()))
        scale = max(scale, float(np.abs(al).max()), float(np.abs(dh).max()))
    dt = float(np.diff(lift.tgrid).max()) if lift.ntimes > 1 else 0.0
    allowed = 5.0 * (dt + float(lift.grid.step.max())) * scale + 1e-12
    return worst, allowed


def mesh_separation(mesh: LagrangianMesh) -> float:
    """Tube-radius estimate ``min |q - p|^2 / (2 |normal part of q - p|)`` over node pairs.

    For a round circle this is its radius; for two far-apart pieces it is half
    the gap between them.  On the torus every periodic copy of ``q`` counts;
    on CP^n chords are taken in the Hermitian-projector embedding.
    """
    n = mesh.grid.size
    if n < 2:
        raise MeshError("degenerate mesh: fewer than two nodes")
    kind, im = mesh.kind, mesh.images
    basis = _tangent_bases(mesh)
    if isinstance(kind, Torus):
        shifts = np.array(np.meshgrid(*[[-1.0, 0.0, 1.0]] * kind.dim, indexing="ij")).reshape(kind.dim, -1).T
    else:
        shifts = np.zeros((1, 1))
    best = np.inf
    chunk = max(1, 2_000_000 // n)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(n, start + chunk))
        rows = np.arange(idx.size)
        same = np.zeros((idx.size, n), dtype=bool)
        same[rows, idx] = True
        if mesh.grid.antipode is not None:
            same[rows, mesh.grid.antipode[idx]] = True
        if isinstance(kind, Projective):
            emb = geom.embed_real(kind, im)
            base = emb[None, :, :] - emb[idx, None, :]
        else:
            base = geom.displacement(kind, im[idx, None, :], im[None, :, :])
        for shift in shifts:
            zero_shift = not np.any(shift)
            d = base + shift
            sq = np.sum(d ** 2, axis=-1)
            if zero_shift and np.any((sq < 1e-24) & ~same):
                raise MeshError("degenerate mesh: distinct nodes share an image")
            tang = np.einsum("ikd,ijd->ijk", basis[idx], d)
            normal = np.sqrt(np.maximum(sq - np.sum(tang ** 2, axis=-1), 0.0))
            skip = (same if zero_shift else False) | (normal <= 1e-13 * np.sqrt(sq))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(skip, np.inf, sq / (2 * normal))
            best = min(best, float(ratio.min()))
    if not np.isfinite(best):
        raise MeshError("degenerate mesh: separation undefined")
    return best


def _tangent_bases(mesh: LagrangianMesh) -> np.ndarray:
    """Orthonormal real tangent bases per node, shape ``(N, d, D_real)``.

    On CP^n the bases live in the Hermitian-projector embedding.
    """
    fr = mesh.frames
    if isinstance(mesh.kind, Projective):
        fr = geom.embed_tangent(mesh.kind, mesh.images[:, None, :], fr)
    q, _ = np.linalg.qr(np.swapaxes(fr, -1, -2))
    return np.swapaxes(q, -1, -2)


# ---------------------------------------------------------------------------
# serialization


def _encode(arr: np.ndarray):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return np.stack([arr.real, arr.imag], axis=-1).tolist()
    return arr.tolist()


def _decode(data, kind: ManifoldKind) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if isinstance(kind, Projective):
        return arr[..., 0] + 1j * arr[..., 1]
    return arr


def lift_to_json(lift: PathLift) -> str:
    """Serialize a lift; floats use Python's shortest round-trip representation."""
    doc = {
        "kind": geom.kind_to_dict(lift.kind),
        "model": lift.grid.to_dict(),
        "tgrid": lift.tgrid.tolist(),
        "nodes": lift.grid.params.tolist(),
        "images": _encode(lift.images),
    }
    return json.dumps(doc)


def lift_from_json(text: str) -> PathLift:
    doc = json.loads(text)
    kind = geom.kind_from_dict(doc["kind"])
    grid = ModelGrid.from_dict(doc["model"])
    images = _decode(doc["images"], kind)
    return PathLift(kind, grid, np.asarray(doc["tgrid"]), images, check=False)


def mesh_to_json(mesh: LagrangianMesh) -> str:
    doc = {
        "kind": geom.kind_to_dict(mesh.kind),
        "model": mesh.grid.to_dict(),
        "tgrid": [0.0],
        "nodes": mesh.grid.params.tolist(),
        "images": _encode(mesh.images[None]),
    }
    return json.dumps(doc)


def mesh_from_json(text: str) -> LagrangianMesh:
    doc = json.loads(text)
    kind = geom.kind_from_dict(doc["kind"])
    grid = ModelGrid.from_dict(doc["model"])
    images = _decode(doc["images"], kind)[0]
    return LagrangianMesh(kind, grid, images)
