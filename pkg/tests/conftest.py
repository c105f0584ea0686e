import numpy as np
import pytest

from hoferlab import geom, lagr
from hoferlab.flow import FlowConfig, HamiltonianSpec, integrate_path, projective_rotation_hamiltonian


def circle_images(grid, centre=(0.0, 0.0), radius=1.0):
    th = grid.params[:, 0]
    return np.column_stack([centre[0] + radius * np.cos(th), centre[1] + radius * np.sin(th)])


def linear_H(gx, gy, label="linear"):
    g = np.array([gx, gy], dtype=float)
    return HamiltonianSpec(
        lambda t, p: np.atleast_2d(p) @ g,
        lambda t, p: np.broadcast_to(g, np.atleast_2d(p).shape).copy(),
        autonomous=True,
        label=label,
    )


def rp1_images(grid):
    phi = grid.params[:, 0]
    return np.column_stack([np.cos(phi), np.sin(phi)]).astype(complex)


def rp2_images(grid):
    th, ph = grid.params[:, 0], grid.params[:, 1]
    return np.column_stack([np.cos(th), np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph)]).astype(complex)


@pytest.fixture(scope="session")
def circle_mesh():
    grid = lagr.ModelGrid.circle(256)
    return lagr.LagrangianMesh(geom.Euclidean(1), grid, circle_images(grid))


@pytest.fixture(scope="session")
def translated_circle(circle_mesh):
    """Unit circle under H = x (flow (x, y) -> (x, y - t)), 101 time samples."""
    H = linear_H(1.0, 0.0, "x")
    lift = integrate_path(geom.Euclidean(1), H, circle_mesh, np.linspace(0, 1, 101))
    return lift, H


@pytest.fixture(scope="session")
def rotation_rp1():
    grid = lagr.ModelGrid.rp1(256)
    kind = geom.Projective(1)
    mesh = lagr.LagrangianMesh(kind, grid, rp1_images(grid))
    H = projective_rotation_hamiltonian(1, 1, 1.0)
    lift = integrate_path(kind, H, mesh, np.linspace(0, 1, 101))
    return lift, H


@pytest.fixture(scope="session")
def torus_graph():
    a = 0.1
    grid = lagr.ModelGrid.circle(256)
    x = grid.params[:, 0] / (2 * np.pi)
    kind = geom.Torus(1)
    mesh = lagr.LagrangianMesh(kind, grid, np.column_stack([x, np.zeros_like(x)]))
    H = HamiltonianSpec(
        lambda t, p: a * np.cos(2 * np.pi * np.atleast_2d(p)[:, 0]) / (2 * np.pi),
        lambda t, p: np.column_stack([-a * np.sin(2 * np.pi * np.atleast_2d(p)[:, 0]), np.zeros(len(p))]),
        autonomous=True,
    )
    lift = integrate_path(kind, H, mesh, np.linspace(0, 1, 101))
    return lift, H
