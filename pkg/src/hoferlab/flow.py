"""Hamiltonian vector fields and time-dependent flows of sampled meshes.

The sign convention is fixed: ``omega(X_t, .) = dH_t``.  On R^{2n} and the
torus with ``omega = sum dx ^ dy`` this gives ``X = (dH/dy, -dH/dx)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geom
from .geom import ManifoldKind, Projective
from .lagr import LagrangianMesh, MeshError, PathLift, lagrangian_defect


class FlowError(RuntimeError):
    """Integration failure (gradient evaluation or Lagrangian defect)."""


@dataclass(frozen=True)
class HamiltonianSpec:
    """Time-dependent function ``H(t, p)`` on a manifold.

    ``func(t, p)`` must accept a batch of points ``p`` of shape ``(N, D)`` and
    return ``N`` values.  ``grad(t, p)``, when given, returns the gradient in
    ambient coordinates: a real ``(N, 2n)`` array on the flat backends, or on
    CP^n a complex ``g`` with ``dH(v) = Re<g, v>`` for horizontal ``v``.
    ``oracle(t, p)`` is an optional exact flow ``psi_t`` used for validation.
    """

    func: Callable
    grad: Callable | None = None
    oracle: Callable | None = None
    support: str = "global"
    cutoff: float | None = None
    autonomous: bool = False
    label: str = "H"

    def __call__(self, t, p):
        return self.func(t, p)

    def shifted(self, c: Callable) -> "HamiltonianSpec":
        """``H + c(t)``: same flow, associated function shifted per time."""
        return HamiltonianSpec(
            func=lambda t, p: self.func(t, p) + c(t),
            grad=self.grad,
            oracle=self.oracle,
            support=self.support,
            cutoff=self.cutoff,
            autonomous=False,
            label=f"{self.label}+c(t)",
        )


@dataclass(frozen=True)
class FlowConfig:
    stepper: str = "rk4"
    steps: int = 200
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.stepper not in ("rk4", "midpoint"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if self.steps < 50:
            raise ValueError("step count per unit time must be at least 50")
        if not 1e-7 <= self.fd_step <= 1e-3:
            raise ValueError("finite-difference step must lie in [1e-7, 1e-3]")


def gradient(kind: ManifoldKind, H: HamiltonianSpec, t: float, p: np.ndarray,
             fd_step: float = 1e-5) -> np.ndarray:
    """Ambient gradient of ``H(t, .)``; analytic if available, else central differences.

    On CP^n the result is the horizontal gradient ``g_h`` with
    ``dH(v) = Re<g_h, v>`` for every horizontal ``v``.
    """
    p = np.asarray(p, dtype=kind.dtype)
    single = p.ndim == 1
    pts = p[None] if single else p
    try:
        if isinstance(kind, Projective):
            g = _projective_gradient(H, t, pts, fd_step)
        elif H.grad is not None:
            g = np.asarray(H.grad(t, pts), dtype=float)
        else:
            g = _flat_fd_gradient(H, t, pts, fd_step)
    except FlowError:
        raise
    except Exception as exc:
        raise FlowError(f"gradient evaluation failed: {exc}") from exc
    if not np.all(np.isfinite(g)):
        raise FlowError("gradient evaluation produced non-finite values")
    return g[0] if single else g


def _flat_fd_gradient(H, t, pts, fd_step):
    n_pts, dim = pts.shape
    h = fd_step * np.maximum(1.0, np.abs(pts))
    g = np.empty((n_pts, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        step = h[:, i:i + 1] * e
        g[:, i] = (H(t, pts + step) - H(t, pts - step)) / (2 * h[:, i])
    return g


def _projective_gradient(H, t, pts, fd_step):
    if H.grad is not None:
        g = np.asarray(H.grad(t, pts), dtype=complex)
        return g - geom.hermitian(pts, g)[..., None] * pts
    dim = pts.shape[-1]
    eye = np.eye(dim, dtype=complex)
    g = np.zeros_like(pts)
    # Real orthonormal basis {e_j, i e_j}; projecting each to the horizontal
    # space and weighting by dH gives P g = g_h.
    for e in np.concatenate([eye, 1j * eye]):
        pe = e - geom.hermitian(pts, e)[..., None] * pts
        plus = geom.reduce_point(geom.Projective(dim - 1), pts + fd_step * pe)
        minus = geom.reduce_point(geom.Projective(dim - 1), pts - fd_step * pe)
        dh = (H(t, plus) - H(t, minus)) / (2 * fd_step)
        g = g + dh[:, None] * e
    return g - geom.hermitian(pts, g)[..., None] * pts


def hamiltonian_vector_field(kind: ManifoldKind, H: HamiltonianSpec, t: float, p,
                             fd_step: float = 1e-5) -> np.ndarray:
    """Solve ``omega(X, .) = dH_t`` at ``p``."""
    g = gradient(kind, H, t, p, fd_step)
    if isinstance(kind, Projective):
        # omega = Im<,>/pi and Im<X, v> = Re<iX, v>, so X = -i pi g_h.
        return -1j * np.pi * g
    n = kind.n
    return np.concatenate([g[..., n:], -g[..., :n]], axis=-1)


def _advance(kind, H, t, y, dt, cfg):
    def f(tt, yy):
        return hamiltonian_vector_field(kind, H, tt, yy, cfg.fd_step)

    if cfg.stepper == "rk4":
        k1 = f(t, y)
        k2 = f(t + dt / 2, _renorm(kind, y + dt / 2 * k1))
        k3 = f(t + dt / 2, _renorm(kind, y + dt / 2 * k2))
        k4 = f(t + dt, _renorm(kind, y + dt * k3))
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        k1 = f(t, y)
        y = y + dt * f(t + dt / 2, _renorm(kind, y + dt / 2 * k1))
    return geom.reduce_point(kind, y)


def _renorm(kind, y):
    if isinstance(kind, Projective):
        return y / np.linalg.norm(y, axis=-1, keepdims=True)
    return y


def integrate_points(kind: ManifoldKind, H: HamiltonianSpec, p0: np.ndarray, tgrid,
                     cfg: FlowConfig = FlowConfig()) -> np.ndarray:
    """Trajectories of the points ``p0`` sampled on ``tgrid``; shape ``(T, N, D)``."""
    tgrid = np.asarray(tgrid, dtype=float)
    y = geom.reduce_point(kind, np.array(p0, dtype=kind.dtype))
    out = np.empty((tgrid.size,) + y.shape, dtype=kind.dtype)
    out[0] = y
    for i in range(tgrid.size - 1):
        span = tgrid[i + 1] - tgrid[i]
        nsub = max(1, int(np.ceil(cfg.steps * span - 1e-9)))
        dt = span / nsub
        t = tgrid[i]
        for j in range(nsub):
            y = _advance(kind, H, t + j * dt, y, dt, cfg)
        out[i + 1] = y
    return out


def integrate_path(kind: ManifoldKind, H: HamiltonianSpec, L0: LagrangianMesh, tgrid,
                   cfg: FlowConfig = FlowConfig()) -> PathLift:
    """Flow lift ``iota_t = psi_t o iota_0`` of a Lagrangian mesh."""
    images = integrate_points(kind, H, L0.images, tgrid, cfg)
    for ti, im in enumerate(images):
        defect = lagrangian_defect(kind, L0.grid, im)
        if defect > L0.tol_lag:
            raise FlowError(
                f"Lagrangian defect {defect:.3g} at t={tgrid[ti]:.4g}; try more steps"
            )
    try:
        return PathLift(kind, L0.grid, tgrid, images, L0.tol_lag, check=False)
    except MeshError as exc:
        raise FlowError(str(exc)) from exc


def oracle_path(kind: ManifoldKind, H: HamiltonianSpec, L0: LagrangianMesh, tgrid) -> PathLift:
    """Lift built from the exact flow attached to ``H``."""
    if H.oracle is None:
        raise FlowError(f"{H.label} has no exact-flow oracle")
    tgrid = np.asarray(tgrid, dtype=float)
    images = np.stack([H.oracle(t, L0.images) for t in tgrid])
    return PathLift(kind, L0.grid, tgrid, images, L0.tol_lag)


# ---------------------------------------------------------------------------
# the rotation of CP^n


def exact_flow_projective_rotation(n: int, k: int, s: float, t: float, p) -> np.ndarray:
    """``[z_0 : e^{i pi s t} z_1 : ... : e^{i pi s t} z_k : z_{k+1} : ... : z_n]``."""
    p = np.asarray(p, dtype=complex)
    if p.shape[-1] != n + 1:
        raise geom.GeometryError(f"expected {n + 1} homogeneous coordinates")
    out = p.copy()
    out[..., 1:k + 1] *= np.exp(1j * np.pi * s * t)
    return out


def projective_rotation_hamiltonian(n: int, k: int, s: float,
                                    rate: Callable | None = None) -> HamiltonianSpec:
    """``H = -s (|z_1|^2 + ... + |z_k|^2) / (2 |z|^2)``, optionally scaled by ``rate(t)``.

    With a rate profile ``rho`` the flow is the same rotation run at speed
    ``rho(t)``; ``rate`` must then come with its antiderivative as
    ``rate.integral``.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")

    def scale(t):
        return 1.0 if rate is None else rate(t)

    def func(t, p):
        p = np.asarray(p)
        num = np.sum(np.abs(p[..., 1:k + 1]) ** 2, axis=-1)
        return -scale(t) * s * num / (2 * np.sum(np.abs(p) ** 2, axis=-1))

    def grad(t, p):
        g = np.zeros_like(p, dtype=complex)
        g[..., 1:k + 1] = -scale(t) * s * p[..., 1:k + 1]
        return g

    def oracle(t, p):
        elapsed = t if rate is None else rate.integral(t)
        return exact_flow_projective_rotation(n, k, s, elapsed, p)

    return HamiltonianSpec(func, grad, oracle, autonomous=rate is None,
                           label=f"rotation(n={n},k={k},s={s})")
