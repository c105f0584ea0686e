import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoferlab import hofer, lagr
from hoferlab.flow import HamiltonianSpec, integrate_path
from hoferlab.geom import Euclidean
from hoferlab.hofer import InconsistentPathError
from hoferlab.lagr import AssociatedFunction, PathLift

from conftest import circle_images, linear_H


def test_oscillation_examples(translated_circle, rotation_rp1):
    assert hofer.oscillation(np.full(7, 2.5)) == 0.0
    lift, H = translated_circle
    assert hofer.oscillation(H(0.0, lift.images[0])) == pytest.approx(2.0, abs=1e-12)
    lift, H = rotation_rp1
    assert abs(hofer.oscillation(H(0.3, lift.images[30])) - 0.5) <= 1e-3
    with pytest.raises(ValueError):
        hofer.oscillation(np.array([]))


def test_hofer_norm_examples():
    t = np.linspace(0, 1, 11)
    assert hofer.hofer_norm(np.zeros((11, 5)), t) == 0.0
    slice_ = np.array([-1.0, 0.2, 1.0])
    assert hofer.hofer_norm(np.tile(slice_, (11, 1)), t) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ValueError):
        hofer.hofer_norm(np.zeros((10, 5)), t)


def test_hofer_length_examples(circle_mesh, translated_circle, rotation_rp1):
    zero = HamiltonianSpec(lambda t, p: np.zeros(len(p)))
    assert hofer.hofer_length(PathLift.constant(circle_mesh, np.linspace(0, 1, 5)), zero).total == 0.0
    lift, H = translated_circle
    assert hofer.hofer_length(lift, H).total == pytest.approx(2.0, abs=1e-12)
    lift, H = rotation_rp1
    assert abs(hofer.hofer_length(lift, H).total - 0.5) <= 1e-3


def test_hofer_length_refuses_mismatched_pair(translated_circle):
    lift, _ = translated_circle
    with pytest.raises(InconsistentPathError):
        hofer.hofer_length(lift, linear_H(0.0, 1.0))
    # without the check the number is computed anyway
    assert hofer.hofer_length(lift, linear_H(0.0, 1.0), check=False).total > 0


def test_breakdown_fields_and_exports(translated_circle):
    lift, H = translated_circle
    b = hofer.hofer_length(lift, H)
    assert np.all(b.osc >= 0)
    assert b.total == pytest.approx(hofer.trapezoid(b.osc, b.t), abs=0)
    d = json.loads(b.to_json())
    assert d["rule"] == "trapezoid" and len(d["osc"]) == lift.ntimes
    rows = b.to_csv().splitlines()
    assert rows[0] == "t,max,min,osc"
    assert len(rows) == lift.ntimes + 1
    t, mx, mn, osc = map(float, rows[5].split(","))
    assert (t, mx, mn, osc) == (b.t[4], b.hmax[4], b.hmin[4], b.osc[4])


def test_resolution_error_bar_tracks_true_error():
    grid = lagr.ModelGrid.circle(64, offset=0.5)
    mesh = lagr.LagrangianMesh(Euclidean(1), grid, circle_images(grid))
    H = linear_H(1.0, 0.0)
    lift = integrate_path(Euclidean(1), H, mesh, np.linspace(0, 1, 5))
    b = hofer.hofer_length(lift, H)
    true_error = 2.0 - b.total
    assert true_error > 0
    assert b.error_bar == pytest.approx(true_error, rel=0.05)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_length_invariant_under_relabeling(translated_circle, rotation_rp1, seed):
    rng = np.random.default_rng(seed)
    for lift, H in (translated_circle, rotation_rp1):
        perm = rng.permutation(lift.grid.size)
        a = hofer.hofer_length(lift, H, check=False).total
        b = hofer.hofer_length(lift.relabel(perm), H, check=False).total
        assert abs(a - b) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), const=st.booleans())
def test_norm_nonnegative_and_zero_iff_constant_slices(seed, const):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, 9)
    vals = rng.normal(size=(9, 1)) * np.ones((9, 6)) if const else rng.normal(size=(9, 6))
    n = hofer.hofer_norm(AssociatedFunction(vals), t)
    assert n >= 0
    assert (n == 0) == const


def test_time_refinement_is_second_order():
    grid = lagr.ModelGrid.circle(64)
    mesh = lagr.LagrangianMesh(Euclidean(1), grid, circle_images(grid))
    base = linear_H(1.0, 0.0)
    H = HamiltonianSpec(lambda t, p: (1 + t * t) * base(t, p), lambda t, p: (1 + t * t) * base.grad(t, p))
    exact = 2.0 * (1 + 1 / 3)
    errs = []
    for n in (11, 21, 41):
        lift = integrate_path(Euclidean(1), H, mesh, np.linspace(0, 1, n))
        errs.append(hofer.hofer_length(lift, H).total - exact)
    assert 3.5 < errs[0] / errs[1] < 4.5
    assert 3.5 < errs[1] / errs[2] < 4.5
