import numpy as np
import pytest

from activeflux import Advection, BoundarySpec, Scheme, SolutionState, Space, TimeConfig, neumann
from activeflux.mesh import structured_mesh
from activeflux.models import constant_field
from activeflux.timestepping import (SSP_A, SSP_B, SSP_C, SSP_FLUX_WEIGHTS, TimeSteppingError, compute_dt,
                                     max_wave_speed, run_to_time, ssprk3_step)


class LinearODE:
    """du/dt = lam u on both point values and averages; face fluxes proportional to u."""

    def __init__(self, lam):
        self.lam = lam

    def __call__(self, state):
        return self.lam * state.point_values, self.lam * state.averages, state.averages.copy()


def test_shu_osher_coefficients():
    assert SSP_A == (0.0, 0.75, 1.0 / 3.0)
    assert SSP_B == (1.0, 0.25, 2.0 / 3.0)
    assert SSP_C == (1.0, 0.5, 1.0)
    assert sum(SSP_FLUX_WEIGHTS) == pytest.approx(1.0)


def test_stability_polynomial_is_third_order_taylor():
    z = -0.37
    s = SolutionState(np.ones((1, 1)), np.ones((1, 1)))
    out, _ = ssprk3_step(s, 1.0, LinearODE(z))
    assert out.point_values[0, 0] == pytest.approx(1 + z + z * z / 2 + z ** 3 / 6, rel=1e-14)


def test_third_order_convergence_on_linear_ode():
    lam = -1.3
    errs = []
    for n in (20, 40, 80):
        s = SolutionState(np.ones((1, 1)), np.ones((1, 1)))
        dt = 1.0 / n
        for _ in range(n):
            s, _ = ssprk3_step(s, dt, LinearODE(lam))
        errs.append(abs(s.averages[0, 0] - np.exp(lam)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 2.9)


def test_effective_flux_matches_average_update():
    """The averages move by exactly dt * (weighted sum of stage fluxes) for flux-form rhs."""
    class FluxForm:
        def __call__(self, state):
            F = np.sin(state.averages) + 0.3
            return 0 * state.point_values, -F, F

    s = SolutionState(np.zeros((1, 1)), np.array([[0.4]]))
    out, info = ssprk3_step(s, 0.1, FluxForm())
    assert out.averages[0, 0] == pytest.approx(0.4 - 0.1 * info.fluxes[0, 0], rel=1e-14)


@pytest.fixture
def advection_scheme():
    mesh = structured_mesh(4, 4, (0.0, 2.0, 0.0, 1.0))
    space = Space(mesh, 2)
    return Scheme.build(space, Advection(constant_field((3.0, 4.0))), BoundarySpec.uniform(neumann()))


def test_dt_formula(advection_scheme):
    sp = advection_scheme.space
    s = sp.interpolate(lambda x: np.ones(x.shape[:-1] + (1,)))
    lam = max_wave_speed(advection_scheme, s)
    assert np.allclose(lam, 5.0)
    mesh = sp.mesh
    e = mesh.vertices[mesh.triangles]
    perim = sum(np.linalg.norm(e[:, i] - e[:, (i + 1) % 3], axis=1) for i in range(3))
    expect = 0.4 * np.min(2 * mesh.areas / (perim * 5.0))
    assert compute_dt(advection_scheme, s, TimeConfig(cfl=0.4, t_final=10.0)) == pytest.approx(expect)
    assert compute_dt(advection_scheme, s, TimeConfig(cfl=0.4, t_final=10.0, paper_stability=True)) == \
        pytest.approx(expect / 2)


def test_dt_is_clipped_to_final_time(advection_scheme):
    s = advection_scheme.space.interpolate(lambda x: x[..., :1])
    cfg = TimeConfig(cfl=0.4, t_final=1e-4)
    assert compute_dt(advection_scheme, s, cfg) == pytest.approx(1e-4)
    out, log = run_to_time(advection_scheme, s, TimeConfig(cfl=0.4, t_final=0.05))
    assert out.time == 0.05
    assert log.steps == len(log.dts) == len(log.lines())
    assert sum(log.dts) == pytest.approx(0.05)
    assert log.lines()[0].startswith("step=1 t=")


def test_max_steps(advection_scheme):
    s = advection_scheme.space.interpolate(lambda x: x[..., :1])
    with pytest.raises(TimeSteppingError):
        run_to_time(advection_scheme, s, TimeConfig(t_final=1.0, max_steps=2))


def test_config_validation():
    with pytest.raises(ValueError):
        TimeConfig(cfl=0.0)
    with pytest.raises(ValueError):
        TimeConfig(t_final=-1.0)
