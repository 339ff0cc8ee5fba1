import numpy as np
import pytest
from hypothesis import given, strategies as st

from activeflux import KPP, Advection, BoundarySpec, Euler, Scheme, SolutionState, Space, neumann, wall
from activeflux.loworder import (LowOrderConfig, llf_subelement_residual, loworder_average_rhs,
                                 loworder_face_fluxes, loworder_point_rhs, provable_dt)
from activeflux.mesh import structured_mesh
from activeflux.models import constant_field, rotation_field, rusanov

from conftest import perturbed_mesh


def stencil_bounds(space, state):
    """Per point: min/max over every DoF of the elements holding it; per cell: face neighbours' averages."""
    loc = space.local_values(state)[..., 0]
    tp = space.dofmap.tri_points
    lo = np.full(space.n_points, np.inf)
    hi = np.full(space.n_points, -np.inf)
    np.minimum.at(lo, tp, np.repeat(loc.min(1)[:, None], tp.shape[1], 1))
    np.maximum.at(hi, tp, np.repeat(loc.max(1)[:, None], tp.shape[1], 1))
    et = space.mesh.edge_tris
    inner = et[:, 1] >= 0
    alo = state.averages[:, 0].copy()
    ahi = alo.copy()
    for i, j in ((0, 1), (1, 0)):
        np.minimum.at(alo, et[inner, i], state.averages[et[inner, j], 0])
        np.maximum.at(ahi, et[inner, i], state.averages[et[inner, j], 0])
    return lo, hi, alo, ahi


MODELS = {
    "constant": lambda: Advection(constant_field((1.0, 0.3))),
    "rotation": lambda: Advection(rotation_field((0.5, 0.5))),
    "kpp": KPP,
}


@pytest.mark.parametrize("order", [2, 3])
@pytest.mark.parametrize("model", sorted(MODELS))
@given(seed=st.integers(0, 2 ** 31 - 1), mesh_seed=st.integers(0, 2))
def test_maximum_principle_under_provable_dt(order, model, seed, mesh_seed):
    space = Space(perturbed_mesh(4, seed=mesh_seed), order)
    scheme = Scheme.build(space, MODELS[model](), BoundarySpec.uniform(neumann()))
    rng = np.random.default_rng(seed)
    state = SolutionState(rng.uniform(-1, 2, (space.n_points, 1)), rng.uniform(-1, 2, (space.n_triangles, 1)))
    dt = provable_dt(scheme, state)
    pts = state.point_values[:, 0] + dt * loworder_point_rhs(scheme, state)[:, 0]
    avg = state.averages[:, 0] + dt * loworder_average_rhs(scheme, state)[:, 0]
    lo, hi, alo, ahi = stencil_bounds(space, state)
    tol = 1e-13
    assert np.all(pts >= lo - tol) and np.all(pts <= hi + tol)
    assert np.all(avg >= alo - tol) and np.all(avg <= ahi + tol)


def test_kpp_rusanov_speed_covers_the_fan():
    k = KPP()
    n = np.array([[1.0, 0.0]])
    # cos u vanishes at both ends but reaches 1 at u = 2 pi in between
    uL, uR = np.array([[1.5 * np.pi]]), np.array([[2.5 * np.pi]])
    assert k.fan_speed(uL, uR, n)[0] == pytest.approx(1.0)
    assert k.max_speed(uL, n)[0] == pytest.approx(0.0, abs=1e-15)
    uL, uR = np.array([[0.2]]), np.array([[0.4]])
    assert k.fan_speed(uL, uR, n)[0] == pytest.approx(np.cos(0.2))


def test_residual_examples():
    model = Advection(constant_field((1.0, 0.5)))
    xy = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    normals = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])  # inward, opposite each node
    c = xy.mean(0)
    const = np.full((3, 1), 2.0)
    assert np.allclose(llf_subelement_residual(model, const, normals, c, xy), 0.0)
    vals = np.array([[1.0], [3.0], [-2.0]])
    res = llf_subelement_residual(model, vals, normals, c, xy)
    grad = np.array([2.0, -3.0])  # gradient of the P1 interpolant
    assert res.sum() == pytest.approx(0.5 * (1.0 * grad[0] + 0.5 * grad[1]))


def test_rusanov_is_upwind_for_linear_advection():
    mesh = perturbed_mesh(4, seed=5)
    space = Space(mesh, 2)
    a = np.array([1.0, 0.4])
    scheme = Scheme.build(space, Advection(constant_field(a)), BoundarySpec.uniform(neumann()))
    rng = np.random.default_rng(1)
    avg = rng.normal(size=(space.n_triangles, 1))
    F = loworder_face_fluxes(scheme, avg)[space.interior_edges, 0]
    et = mesh.edge_tris[space.interior_edges]
    an = space.edge_scaled_normals[space.interior_edges] @ a
    upwind = np.where(an > 0, avg[et[:, 0], 0], avg[et[:, 1], 0])
    assert np.allclose(F, an * upwind, atol=1e-14)


@pytest.mark.parametrize("order", [2, 3])
def test_constant_state_is_steady(order):
    e = Euler()
    u0 = e.to_conservative(np.array([1.0, 0.3, -0.2, 1.0]))
    space = Space(perturbed_mesh(5, seed=1), order)
    scheme = Scheme.build(space, e, BoundarySpec.uniform(neumann()), LowOrderConfig(flux="roe"))
    state = SolutionState(np.tile(u0, (space.n_points, 1)), np.tile(u0, (space.n_triangles, 1)))
    assert np.abs(loworder_average_rhs(scheme, state)).max() < 1e-12
    assert np.abs(loworder_point_rhs(scheme, state)).max() < 1e-12


def test_average_update_conserves_mass():
    space = Space(perturbed_mesh(5, seed=2), 2)
    scheme = Scheme.build(space, KPP(), BoundarySpec.uniform(wall()))
    rng = np.random.default_rng(0)
    state = SolutionState(rng.uniform(0, 3, (space.n_points, 1)), rng.uniform(0, 3, (space.n_triangles, 1)))
    F = loworder_face_fluxes(scheme, state.averages)
    ie = space.interior_edges
    et = space.mesh.edge_tris[ie]
    uL, uR = state.averages[et[:, 0]], state.averages[et[:, 1]]
    n = space.edge_scaled_normals[ie]
    assert np.allclose(F[ie], rusanov(scheme.model, uL, uR, n))
    assert np.allclose(F[ie], -rusanov(scheme.model, uR, uL, -n))


def test_config_validation():
    assert LowOrderConfig(flux="roe").flux == "roe_hartenyee"
    with pytest.raises(ValueError):
        LowOrderConfig(flux="hllc")
    with pytest.raises(ValueError):
        LowOrderConfig(alpha_safety=0.5)
