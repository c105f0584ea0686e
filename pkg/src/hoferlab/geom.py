"""Concrete symplectic manifolds.

Three backends are provided:

* ``Euclidean(n)``: R^{2n} with coordinates ``(x_1..x_n, y_1..y_n)`` and
  ``omega = sum dx_i ^ dy_i``.
* ``Torus(n)``: R^{2n}/Z^{2n}, same form, coordinates reduced to ``[0, 1)``.
* ``Projective(n)``: CP^n, points stored as unit vectors in C^{n+1}.  Tangent
  vectors are horizontal lifts (Hermitian-orthogonal to the base point) and

      omega(u, v) = Im<u, v> / pi,     g(u, v) = Re<u, v> / pi,

  with ``<u, v> = sum conj(u_j) v_j``.  The factor ``1/pi`` is the scaling
  under which ``H = -s |z_1..z_k|^2 / (2 |z|^2)`` generates the rotation
  ``z_j -> exp(i pi s t) z_j`` for ``omega(X, .) = dH``.

All functions broadcast over leading axes; the last axis holds coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HORIZONTAL_TOL = 1e-10
UNIT_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for malformed points/tangents or unsupported backend operations."""


@dataclass(frozen=True)
class Euclidean:
    n: int

    name = "euclidean"
    dtype = np.float64

    @property
    def dim(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class Torus:
    n: int

    name = "torus"
    dtype = np.float64

    @property
    def dim(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class Projective:
    n: int

    name = "projective"
    dtype = np.complex128

    @property
    def dim(self) -> int:
        return self.n + 1


ManifoldKind = Euclidean | Torus | Projective

_KINDS = {"euclidean": Euclidean, "torus": Torus, "projective": Projective}


def kind_from_dict(data: dict) -> ManifoldKind:
    try:
        return _KINDS[data["name"]](int(data["n"]))
    except KeyError as exc:
        raise GeometryError(f"unknown manifold description {data!r}") from exc


def kind_to_dict(kind: ManifoldKind) -> dict:
    return {"name": kind.name, "n": kind.n}


def _check_dims(kind: ManifoldKind, *arrays: np.ndarray) -> None:
    for a in arrays:
        if a.shape[-1] != kind.dim:
            raise GeometryError(
                f"{kind.name}(n={kind.n}) expects {kind.dim} coordinates, got {a.shape[-1]}"
            )


def hermitian(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``<u, v>``, conjugate-linear in the first slot."""
    return np.sum(np.conj(u) * v, axis=-1)


def check_point(kind: ManifoldKind, p) -> np.ndarray:
    p = np.asarray(p, dtype=kind.dtype)
    _check_dims(kind, p)
    if isinstance(kind, Projective):
        norms = np.linalg.norm(p, axis=-1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise GeometryError("projective representatives must have unit norm")
    return p


def _check_horizontal(p: np.ndarray, u: np.ndarray) -> None:
    scale = np.maximum(1.0, np.linalg.norm(u, axis=-1))
    if np.any(np.abs(hermitian(p, u)) > HORIZONTAL_TOL * scale):
        raise GeometryError("projective tangent vector is not horizontal")


def _prepare(kind, p, u, v):
    p = check_point(kind, p)
    u = np.asarray(u, dtype=kind.dtype)
    v = np.asarray(v, dtype=kind.dtype)
    _check_dims(kind, u, v)
    if isinstance(kind, Projective):
        _check_horizontal(p, u)
        _check_horizontal(p, v)
    return p, u, v


def omega_raw(kind: ManifoldKind, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Unchecked symplectic pairing; inputs assumed valid."""
    if isinstance(kind, Projective):
        return np.imag(hermitian(u, v)) / np.pi
    n = kind.n
    return np.sum(u[..., :n] * v[..., n:] - u[..., n:] * v[..., :n], axis=-1)


def metric_raw(kind: ManifoldKind, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if isinstance(kind, Projective):
        return np.real(hermitian(u, v)) / np.pi
    return np.sum(u * v, axis=-1)


def omega(kind: ManifoldKind, p, u, v):
    """Symplectic form at ``p`` evaluated on tangent vectors ``u``, ``v``."""
    _, u, v = _prepare(kind, p, u, v)
    return omega_raw(kind, u, v)


def metric(kind: ManifoldKind, p, u, v):
    """Riemannian metric compatible with :func:`omega`."""
    _, u, v = _prepare(kind, p, u, v)
    return metric_raw(kind, u, v)


def wrap(d: np.ndarray) -> np.ndarray:
    """Shortest representative of a torus displacement, in ``[-1/2, 1/2)``."""
    return d - np.floor(d + 0.5)


def displacement(kind: ManifoldKind, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Chord ``q - p`` in the ambient coordinates (wrapped on the torus).

    On the projective backend ``q`` is first phase-aligned to ``p`` and the
    result is projected to the horizontal space at ``p``.
    """
    if isinstance(kind, Torus):
        return wrap(q - p)
    if isinstance(kind, Projective):
        q = align_phase(p, q)
        d = q - p
        return d - hermitian(p, d)[..., None] * p
    return q - p


def distance(kind: ManifoldKind, p, q) -> np.ndarray:
    """Ambient distance; Fubini-Study ``arccos|<p, q>|`` on CP^n (wrapped on the torus)."""
    p = check_point(kind, p)
    q = check_point(kind, q)
    return distance_raw(kind, p, q)


def distance_raw(kind: ManifoldKind, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    if isinstance(kind, Projective):
        # atan2(sin, cos) keeps full precision for nearby points, unlike arccos.
        c = hermitian(p, q)
        perp = q - c[..., None] * p
        return np.arctan2(np.linalg.norm(perp, axis=-1), np.abs(c))
    if isinstance(kind, Torus):
        return np.linalg.norm(wrap(q - p), axis=-1)
    return np.linalg.norm(q - p, axis=-1)


def reduce_point(kind: ManifoldKind, p: np.ndarray) -> np.ndarray:
    """Canonical storage form: mod 1 on the torus, unit norm on CP^n."""
    if isinstance(kind, Torus):
        r = np.mod(p, 1.0)
        return np.where(r >= 1.0, 0.0, r)
    if isinstance(kind, Projective):
        norm = np.linalg.norm(p, axis=-1, keepdims=True)
        # leave unit vectors bit-for-bit unchanged so stored lifts round-trip exactly
        return np.where(np.abs(norm - 1.0) <= 1e-15, p, p / norm)
    return p


def align_phase(ref: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Rotate ``z`` by a global phase so that ``<ref, z>`` is real and >= 0."""
    c = hermitian(z, ref)
    mag = np.abs(c)
    phase = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 1.0)
    return z * phase[..., None]


def project_horizontal(kind: ManifoldKind, p, raw) -> np.ndarray:
    """Horizontal part ``raw - <p, raw> p`` of a vector at a unit representative."""
    if not isinstance(kind, Projective):
        raise GeometryError("horizontal projection is only defined on the projective backend")
    p = check_point(kind, p)
    raw = np.asarray(raw, dtype=complex)
    _check_dims(kind, raw)
    return raw - hermitian(p, raw)[..., None] * p


def exp_normal(kind: ManifoldKind, p, v) -> np.ndarray:
    """Flat exponential map ``p + v`` (reduced mod 1 on the torus)."""
    if isinstance(kind, Projective):
        raise GeometryError("exp_normal is not supported on the projective backend")
    p = check_point(kind, p)
    v = np.asarray(v, dtype=float)
    _check_dims(kind, v)
    return reduce_point(kind, p + v)


def embed_tangent(kind: ManifoldKind, p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Differential of :func:`embed_real` applied to tangent vectors ``v`` at ``p``."""
    if isinstance(kind, Projective):
        m = v[..., :, None] * np.conj(p[..., None, :]) + p[..., :, None] * np.conj(v[..., None, :])
        flat = m.reshape(*m.shape[:-2], -1)
        return np.concatenate([flat.real, flat.imag], axis=-1)
    return np.asarray(v, dtype=float)


def embed_real(kind: ManifoldKind, p: np.ndarray) -> np.ndarray:
    """Real coordinates suitable for nearest-neighbour search.

    CP^n uses the Hermitian projector ``z z^*`` flattened to real entries;
    its chordal distance is a monotone function of the Fubini-Study distance.
    """
    if isinstance(kind, Projective):
        outer = p[..., :, None] * np.conj(p[..., None, :])
        flat = outer.reshape(*p.shape[:-1], -1)
        return np.concatenate([flat.real, flat.imag], axis=-1)
    return np.asarray(p, dtype=float)


def random_point(kind: ManifoldKind, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = (kind.dim,) if size is None else (size, kind.dim)
    if isinstance(kind, Projective):
        z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return reduce_point(kind, z)
    if isinstance(kind, Torus):
        return rng.random(shape)
    return rng.normal(size=shape)


def random_tangent(kind: ManifoldKind, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if isinstance(kind, Projective):
        raw = rng.normal(size=p.shape) + 1j * rng.normal(size=p.shape)
        return raw - hermitian(p, raw)[..., None] * p
    return rng.normal(size=p.shape)


def real_tangent_basis(kind: ManifoldKind, p: np.ndarray) -> np.ndarray:
    """Orthonormal (for ``Re<,>``) spanning set of the tangent space at ``p``.

    Returns shape ``(m, dim)``.  For CP^n the horizontal projections of the
    ``2n + 2`` real coordinate directions are returned; they span the
    horizontal space but are not linearly independent.
    """
    if isinstance(kind, Projective):
        eye = np.eye(kind.dim, dtype=complex)
        raw = np.concatenate([eye, 1j * eye])
        return raw - hermitian(p, raw)[..., None] * p
    return np.eye(kind.dim)
