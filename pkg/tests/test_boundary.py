import numpy as np
import pytest
from hypothesis import given, strategies as st

from activeflux import Advection, BoundarySpec, Euler, Scheme, SolutionState, Space, farfield, neumann, wall
from activeflux.boundary import (BoundaryCondition, BoundaryError, boundary_face_flux, exact_dirichlet,
                                 farfield_shares, mirror_state, reflection)
from activeflux.mesh import structured_mesh
from activeflux.models import constant_field

from conftest import perturbed_mesh

E = Euler(1.4)


def random_state(rng, shape=()):
    w = np.stack([rng.uniform(0.3, 2, shape), rng.normal(0, 1, shape), rng.normal(0, 1, shape),
                  rng.uniform(0.3, 2, shape)], axis=-1)
    return E.to_conservative(w)


@given(st.integers(0, 10_000))
def test_mirror_state(seed):
    rng = np.random.default_rng(seed)
    u = random_state(rng, (5,))
    n = rng.normal(size=(5, 2))
    m = mirror_state(u, n)
    assert np.allclose(mirror_state(m, n), u)
    assert np.allclose(m[:, [0, 3]], u[:, [0, 3]])
    t = np.stack([-n[:, 1], n[:, 0]], axis=-1)
    assert np.allclose(np.sum(m[:, 1:3] * n, -1), -np.sum(u[:, 1:3] * n, -1))
    assert np.allclose(np.sum(m[:, 1:3] * t, -1), np.sum(u[:, 1:3] * t, -1))
    scalar = np.array([[0.7]])
    assert np.array_equal(mirror_state(scalar, n[:1]), scalar)


@pytest.mark.parametrize("flux", ["roe", "rusanov"])
@given(seed=st.integers(0, 10_000))
def test_wall_flux_carries_pressure_only(flux, seed):
    rng = np.random.default_rng(seed)
    u = random_state(rng, (4,))
    n = rng.normal(size=(4, 2))
    f = boundary_face_flux(E, wall(), u, n, None, 0.0, flux=flux)
    assert np.allclose(f[:, 0], 0.0, atol=1e-12)
    assert np.allclose(f[:, 3], 0.0, atol=1e-11)
    # tangential momentum flux vanishes too
    t = np.stack([-n[:, 1], n[:, 0]], axis=-1)
    assert np.allclose(np.sum(f[:, 1:3] * t, -1), 0.0, atol=1e-11)


def test_farfield_shares_sum_to_one():
    for order in (2, 3):
        assert farfield_shares(order).sum() == pytest.approx(1.0)
        assert len(farfield_shares(order)) == order + 1


def test_reflection():
    nu = np.array([[0.6, 0.8]])
    R = reflection(nu)[0]
    assert np.allclose(R @ R, np.eye(2))
    assert np.allclose(R @ nu[0], -nu[0])


@pytest.mark.parametrize("order", [2, 3])
def test_euler_rest_state_with_walls_is_steady(order):
    space = Space(perturbed_mesh(5, seed=4), order)
    scheme = Scheme.build(space, E, BoundarySpec.uniform(wall()))
    u0 = E.to_conservative(np.array([1.3, 0.0, 0.0, 0.8]))
    state = SolutionState(np.tile(u0, (space.n_points, 1)), np.tile(u0, (space.n_triangles, 1)))
    rp, ra, _ = scheme(state)
    assert np.abs(rp).max() < 1e-12 and np.abs(ra).max() < 1e-12


@pytest.mark.parametrize("order", [2, 3])
def test_farfield_state_is_steady(order):
    uinf = E.to_conservative(np.array([1.0, 0.8, -0.3, 1.0]))
    space = Space(perturbed_mesh(5, seed=6), order)
    scheme = Scheme.build(space, E, BoundarySpec.uniform(farfield(uinf)))
    state = SolutionState(np.tile(uinf, (space.n_points, 1)), np.tile(uinf, (space.n_triangles, 1)))
    rp, ra, _ = scheme(state)
    assert np.abs(rp).max() < 1e-12 and np.abs(ra).max() < 1e-12


def test_farfield_penalty_pulls_towards_the_state():
    """A perturbed boundary point under farfield relaxes, it is not amplified."""
    space = Space(structured_mesh(4, 4), 2)
    model = Advection(constant_field((1.0, 0.0)))
    scheme = Scheme.build(space, model, BoundarySpec.uniform(farfield([0.0])))
    x = space.point_xy
    inflow = np.flatnonzero((np.abs(x[:, 0]) < 1e-12) & (x[:, 1] > 0.1) & (x[:, 1] < 0.9))
    for i in inflow:
        state = SolutionState(np.zeros((space.n_points, 1)), np.zeros((space.n_triangles, 1)))
        state.point_values[i] = 1.0
        rp, _, _ = scheme(state)
        assert rp[i, 0] < 0


@pytest.mark.parametrize("order", [2, 3])
def test_walls_conserve_everything(order):
    space = Space(perturbed_mesh(5, seed=7), order)
    scheme = Scheme.build(space, E, BoundarySpec.uniform(wall()))
    state = space.interpolate(lambda x: E.to_conservative(np.stack(
        [1 + 0.3 * np.sin(5 * x[..., 0]), np.cos(4 * x[..., 1]), 0.5 * x[..., 0],
         1 + 0.2 * np.cos(3 * x[..., 0] * x[..., 1])], axis=-1)))
    _, ra, _ = scheme(state)
    assert np.abs(ra).max() > 1e-3
    total = space.mesh.areas @ ra
    assert np.allclose(total[[0, 3]], 0.0, atol=1e-12)


def test_exact_dirichlet_constrains_incoming_only():
    space = Space(structured_mesh(4, 4), 2)
    model = Advection(constant_field((1.0, 0.5)))
    g = lambda x, t: np.full(x.shape[:-1] + (1,), 7.0)
    scheme = Scheme.build(space, model, BoundarySpec.uniform(exact_dirichlet(g)))
    state = SolutionState(np.zeros((space.n_points, 1)), np.zeros((space.n_triangles, 1)))
    scheme.constrain(state)
    x = space.point_xy
    inflow = (np.abs(x[:, 0]) < 1e-12) | (np.abs(x[:, 1]) < 1e-12)
    # the corner (1, 0) has summed normal (1, -1): a.n > 0, outgoing
    inflow &= ~np.all(np.isclose(x, [1.0, 0.0]), axis=1)
    assert np.all(state.point_values[inflow] == 7.0)
    assert np.all(state.point_values[~inflow] == 0.0)
    assert np.all(state.averages == 0.0)


def test_neumann_points_are_frozen():
    space = Space(structured_mesh(3, 3), 2)
    scheme = Scheme.build(space, Advection(constant_field((1.0, 0.2))), BoundarySpec.uniform(neumann()))
    state = space.interpolate(lambda x: np.sin(3 * x[..., :1]) + x[..., 1:] ** 2)
    rp, _, _ = scheme(state)
    x = space.point_xy
    on_boundary = (np.abs(x - 0.5).max(axis=1) > 0.5 - 1e-12)
    assert np.all(rp[on_boundary] == 0.0)
    assert np.any(rp[~on_boundary] != 0.0)


def test_validation_errors():
    with pytest.raises(BoundaryError):
        BoundaryCondition("inflow")
    with pytest.raises(BoundaryError):
        BoundaryCondition("farfield")
    with pytest.raises(BoundaryError):
        BoundaryCondition("exact_dirichlet")
    mesh = structured_mesh(2, 2)
    with pytest.raises(BoundaryError):
        BoundarySpec.uniform(farfield([1.0, 2.0])).validate(mesh, E)
    with pytest.raises(BoundaryError):
        BoundarySpec.uniform(farfield([-1.0, 0, 0, 1.0])).validate(mesh, E)
    with pytest.raises(BoundaryError):
        BoundarySpec({"left": wall()}).validate(mesh, E)
