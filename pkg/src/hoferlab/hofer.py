"""Oscillation, the Hofer norm of associated functions, Hofer length of exact paths."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .lagr import AssociatedFunction, ModelGrid, PathLift, associated_function_from_H, consistency_deviation


class InconsistentPathError(ValueError):
    """The lift is not generated by the Hamiltonian it was paired with."""


def _values(h) -> np.ndarray:
    return h.values if isinstance(h, AssociatedFunction) else np.asarray(h, dtype=float)


def oscillation(values) -> float | np.ndarray:
    """``max - min`` over the last axis."""
    v = _values(values)
    if v.size == 0 or v.shape[-1] == 0:
        raise ValueError("oscillation of an empty set")
    return v.max(axis=-1) - v.min(axis=-1)


def trapezoid(y: np.ndarray, t: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    if t.size == 1:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def hofer_norm(h, tgrid) -> float:
    """Trapezoid quadrature over ``t`` of the per-time oscillation of ``h``."""
    v = _values(h)
    tgrid = np.asarray(tgrid, dtype=float)
    if v.shape[0] != tgrid.size:
        raise ValueError(f"{v.shape[0]} time slices for {tgrid.size} time samples")
    return trapezoid(oscillation(v), tgrid)


def resolution_error(grid: ModelGrid, values: np.ndarray) -> np.ndarray:
    """Per-time estimate of how far the mesh extrema sit from the true ones.

    A parabola is fitted through the extremal node and its stencil neighbours
    in each direction; the vertex offset of the fits for max and min are added.
    """
    v = np.atleast_2d(values)
    out = np.zeros(v.shape[0])
    for ti, row in enumerate(v):
        for sign, node in ((1.0, int(np.argmax(row))), (-1.0, int(np.argmin(row)))):
            for d in range(grid.ndir):
                a, c, b = sign * row[grid.bwd[node, d]], sign * row[node], sign * row[grid.fwd[node, d]]
                curv = 2 * c - a - b
                if curv > 0:
                    out[ti] += (b - a) ** 2 / (8 * curv)
    return out


@dataclass(frozen=True, eq=False)
class LengthBreakdown:
    t: np.ndarray
    hmax: np.ndarray
    hmin: np.ndarray
    total: float
    rule: str = "trapezoid"
    resolution: np.ndarray | None = None

    @property
    def osc(self) -> np.ndarray:
        return self.hmax - self.hmin

    @property
    def error_bar(self) -> float:
        if self.resolution is None:
            return 0.0
        return trapezoid(self.resolution, self.t)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "rule": self.rule,
            "error_bar": self.error_bar,
            "t": self.t.tolist(),
            "max": self.hmax.tolist(),
            "min": self.hmin.tolist(),
            "osc": self.osc.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "max", "min", "osc"])
        for row in zip(self.t, self.hmax, self.hmin, self.osc):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def breakdown(h, lift: PathLift) -> LengthBreakdown:
    v = _values(h)
    return LengthBreakdown(
        t=lift.tgrid.copy(),
        hmax=v.max(axis=1),
        hmin=v.min(axis=1),
        total=hofer_norm(v, lift.tgrid),
        resolution=resolution_error(lift.grid, v),
    )


def hofer_length(lift: PathLift, H, check: bool = True) -> LengthBreakdown:
    """Hofer length of the path lifted by ``lift`` and generated by ``H``.

    With ``check`` the velocity one-form is compared with ``d(H o iota_t)``;
    a mismatch means the number would not be the length of this path.
    """
    h = associated_function_from_H(lift, H)
    if check and lift.ntimes > 1:
        worst, allowed = consistency_deviation(lift, h)
        if worst > allowed:
            raise InconsistentPathError(
                f"velocity one-form differs from d(H o iota) by {worst:.3g} (allowed {allowed:.3g})"
            )
    return breakdown(h, lift)
