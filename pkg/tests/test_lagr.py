import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoferlab import geom, lagr
from hoferlab.flow import integrate_path
from hoferlab.geom import Euclidean, Projective
from hoferlab.lagr import LagrangianMesh, MeshError, ModelGrid, NotExactError, PathLift

from conftest import circle_images, linear_H, rp2_images


def constant_lift(mesh, n=11):
    return PathLift.constant(mesh, np.linspace(0, 1, n))


def test_grid_needs_enough_samples():
    with pytest.raises(MeshError):
        ModelGrid.circle(32)
    with pytest.raises(MeshError):
        ModelGrid.sphere2(16, 64)


def test_grid_loops_closed_and_neighbours_consistent():
    for grid in (ModelGrid.circle(64), ModelGrid.circle(64, components=2), ModelGrid.rp1(64)):
        for loop in grid.loops:
            assert loop[0] == loop[-1]
        assert np.all(grid.bwd[grid.fwd[:, 0], 0] == np.arange(grid.size))
    sph = ModelGrid.rp2(33, 64)
    assert sph.loops == ()
    assert np.all(sph.antipode[sph.antipode] == np.arange(sph.size))


def test_grid_dict_round_trip():
    g = ModelGrid.rp2(33, 64)
    g2 = ModelGrid.from_dict(g.to_dict())
    np.testing.assert_array_equal(g.fwd, g2.fwd)
    np.testing.assert_array_equal(g.params, g2.params)


def test_complex_line_is_rejected():
    grid = ModelGrid.sphere2(33, 64)
    th, ph = grid.params[:, 0], grid.params[:, 1]
    z = np.column_stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2), np.zeros_like(th)])
    with pytest.raises(MeshError):
        LagrangianMesh(Projective(2), grid, z)


def test_rp2_is_lagrangian_and_embedded():
    grid = ModelGrid.rp2(33, 64)
    mesh = LagrangianMesh(Projective(2), grid, rp2_images(grid))
    assert lagr.lagrangian_defect(mesh.kind, grid, mesh.images) < 1e-12
    assert mesh.check_embedded() > 0


def test_tgrid_validation(circle_mesh):
    im = np.stack([circle_mesh.images] * 3)
    with pytest.raises(MeshError):
        PathLift(circle_mesh.kind, circle_mesh.grid, [0, 0.7, 0.5], im)
    with pytest.raises(MeshError):
        PathLift(circle_mesh.kind, circle_mesh.grid, [0, 0.5, 0.9], im)


def test_velocity_one_form_constant_lift(circle_mesh):
    lift = constant_lift(circle_mesh)
    for ti in (0, 5, 10):
        assert np.all(lagr.velocity_one_form(lift, ti) == 0)


def test_velocity_one_form_single_time_raises(circle_mesh):
    lift = PathLift.constant(circle_mesh, [0.0])
    with pytest.raises(MeshError):
        lagr.velocity_one_form(lift, 0)


def test_velocity_one_form_translated_circle(translated_circle):
    lift, _ = translated_circle
    for ti in (0, 50, 100):
        al = lagr.velocity_one_form(lift, ti)
        fr = lift.mesh(ti).frames
        # omega((0, -1), e) = e_x
        np.testing.assert_allclose(al[:, 0], fr[:, 0, 0], atol=1e-10)


def test_velocity_one_form_vanishes_on_fixed_locus(rotation_rp1):
    lift, _ = rotation_rp1
    al = lagr.velocity_one_form(lift, 0)
    assert abs(al[0, 0]) < 1e-12  # node phi = 0 is [1:0], fixed by the rotation


def test_associated_function_examples(translated_circle, rotation_rp1):
    lift, H = translated_circle
    h = lagr.associated_function_from_H(lift, H)
    th = lift.grid.params[:, 0]
    np.testing.assert_allclose(h.values, np.broadcast_to(np.cos(th), h.values.shape), atol=1e-12)
    const = lagr.associated_function_from_H(lift, lambda t, p: 3.5)
    assert np.all(const.values == 3.5)
    lift, H = rotation_rp1
    h = lagr.associated_function_from_H(lift, H)
    phi = lift.grid.params[:, 0]
    np.testing.assert_allclose(h.values[0], -np.sin(phi) ** 2 / 2, atol=1e-15)
    np.testing.assert_allclose(h.values[-1], -np.sin(phi) ** 2 / 2, atol=1e-9)


def test_mean_zero_normalization(translated_circle):
    lift, H = translated_circle
    h = lagr.associated_function_from_H(lift, H).mean_zero()
    assert h.normalization == "mean-zero"
    np.testing.assert_allclose(h.values.mean(axis=1), 0, atol=1e-14)


def test_recover_constant_lift(circle_mesh):
    lift = constant_lift(circle_mesh)
    assert np.all(lagr.recover_h_from_alpha(lift, 3) == 0)


def test_recover_translated_circle_at_512():
    grid = ModelGrid.circle(512)
    mesh = LagrangianMesh(Euclidean(1), grid, circle_images(grid))
    H = linear_H(1.0, 0.0)
    lift = integrate_path(Euclidean(1), H, mesh, np.linspace(0, 1, 201))
    h = lagr.associated_function_from_H(lift, H).values
    for ti in (0, 100, 200):
        rec = lagr.recover_h_from_alpha(lift, ti, basepoint=7)
        assert np.abs(rec - (h[ti] - h[ti, 7])).max() <= 1e-3
        assert rec[7] == 0


def test_recover_then_differentiate_matches_alpha(translated_circle):
    lift, _ = translated_circle
    rec = lagr.recover_h_from_alpha(lift, 40)
    al = lagr.velocity_one_form(lift, 40)
    dh = lagr.edge_differential(lift.grid, rec)
    assert np.abs(dh - al).max() <= 1e-3 * np.abs(al).max()


def test_periods_of_hamiltonian_lift_at_512():
    grid = ModelGrid.circle(512)
    mesh = LagrangianMesh(Euclidean(1), grid, circle_images(grid))
    H = linear_H(0.3, -1.0)
    lift = integrate_path(Euclidean(1), H, mesh, np.linspace(0, 1, 51))
    for ti in range(0, 51, 10):
        assert np.abs(lagr.exactness_periods(lift, ti)).max() <= 1e-3


def test_periods_of_constant_lift_are_zero(circle_mesh):
    assert np.all(lagr.exactness_periods(constant_lift(circle_mesh), 4) == 0)


def test_expanding_circle_has_flux():
    grid = ModelGrid.circle(512)
    lift = PathLift.from_map(Euclidean(1), grid, np.linspace(0, 1, 101),
                             lambda t, prm: (1 + t) * circle_images(grid))
    for ti in (0, 50, 100):
        t = lift.tgrid[ti]
        assert lagr.exactness_periods(lift, ti)[0] == pytest.approx(2 * np.pi * (1 + t), rel=1e-3)
        with pytest.raises(NotExactError):
            lagr.recover_h_from_alpha(lift, ti)


def test_sphere_has_no_periods():
    grid = ModelGrid.rp2(33, 64)
    mesh = LagrangianMesh(Projective(2), grid, rp2_images(grid))
    assert lagr.exactness_periods(PathLift.constant(mesh, [0, 1]), 0).size == 0


def test_mesh_separation_circle():
    grid = ModelGrid.circle(512)
    sep = lagr.mesh_separation(LagrangianMesh(Euclidean(1), grid, circle_images(grid)))
    assert 0.5 <= sep <= 1.0


def test_mesh_separation_two_circles():
    gap = 0.6
    grid = ModelGrid.circle(128, components=2)
    comp = grid.params[:, 1]
    im = circle_images(grid) + np.column_stack([comp * (2 + gap), np.zeros_like(comp)])
    sep = lagr.mesh_separation(LagrangianMesh(Euclidean(1), grid, im))
    assert sep <= gap / 2 + 1e-12
    assert sep > 0.25


def test_mesh_separation_degenerate():
    grid = ModelGrid.circle(64)
    with pytest.raises(MeshError):
        lagr.mesh_separation(LagrangianMesh(Euclidean(1), grid, np.zeros((64, 2))))


def test_consistency_on_generated_lifts(translated_circle, rotation_rp1, torus_graph):
    for lift, H in (translated_circle, rotation_rp1, torus_graph):
        h = lagr.associated_function_from_H(lift, H)
        worst, allowed = lagr.consistency_deviation(lift, h)
        assert worst <= allowed


def test_consistency_catches_wrong_hamiltonian(translated_circle):
    lift, _ = translated_circle
    wrong = lagr.associated_function_from_H(lift, linear_H(0.0, 1.0))
    worst, allowed = lagr.consistency_deviation(lift, wrong)
    assert worst > allowed


@settings(max_examples=15, deadline=None)
@given(shift=st.integers(1, 255), ti=st.integers(0, 100))
def test_periods_invariant_under_relabeling(translated_circle, shift, ti):
    lift, _ = translated_circle
    perm = (np.arange(lift.grid.size) + shift) % lift.grid.size
    moved = lift.relabel(perm)
    np.testing.assert_allclose(lagr.exactness_periods(moved, ti), lagr.exactness_periods(lift, ti), atol=1e-12)


def test_lift_json_round_trip(rotation_rp1, translated_circle):
    for lift, _ in (rotation_rp1, translated_circle):
        back = lagr.lift_from_json(lagr.lift_to_json(lift))
        assert back.kind == lift.kind
        np.testing.assert_array_equal(back.images, lift.images)
        np.testing.assert_array_equal(back.tgrid, lift.tgrid)
        np.testing.assert_array_equal(back.grid.fwd, lift.grid.fwd)


def test_mesh_json_round_trip():
    grid = ModelGrid.rp2(33, 64)
    mesh = LagrangianMesh(Projective(2), grid, rp2_images(grid))
    back = lagr.mesh_from_json(lagr.mesh_to_json(mesh))
    np.testing.assert_array_equal(back.images, mesh.images)
    assert back.grid.antipode is not None
