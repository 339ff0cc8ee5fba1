import numpy as np
import pytest
from hypothesis import given, strategies as st

from activeflux.models import (KPP, Advection, Euler, FluxStats, constant_field, eigen_split, harten_yee,
                               numerical_flux, positive_part, roe, rotation_field, rusanov)

GAMMA = 1.4


def euler_states(rng, n):
    w = np.stack([rng.uniform(0.2, 3.0, n), rng.normal(0, 1.5, n), rng.normal(0, 1.5, n),
                  rng.uniform(0.2, 3.0, n)], axis=-1)
    return Euler(GAMMA).to_conservative(w)


def test_primitive_round_trip():
    e = Euler(GAMMA)
    w = np.array([[1.0, 0.5, -0.25, 2.0], [0.125, 0.0, 0.0, 0.1]])
    assert np.allclose(e.to_primitive(e.to_conservative(w)), w)


def test_admissible():
    e = Euler(GAMMA)
    good = e.to_conservative(np.array([1.0, 0.0, 0.0, 1.0]))
    assert e.admissible(good)
    assert not e.admissible(np.array([-1.0, 0, 0, 1]))
    assert not e.admissible(np.array([1.0, 2.0, 0, 1.0]))  # negative pressure
    assert not e.admissible(np.array([np.nan, 0, 0, 1]))


@given(st.integers(0, 10_000))
def test_euler_jacobian_matches_flux_derivative(seed):
    rng = np.random.default_rng(seed)
    e = Euler(GAMMA)
    u = euler_states(rng, 1)[0]
    n = rng.normal(size=2)
    J = e.jacobian_dot_n(u, n)
    h = 1e-6
    fd = np.stack([(e.flux_n(u + h * d, n) - e.flux_n(u - h * d, n)) / (2 * h) for d in np.eye(4)], axis=-1)
    assert np.allclose(J, fd, rtol=1e-6, atol=1e-6)


@given(st.integers(0, 10_000))
def test_euler_eigensystem(seed):
    rng = np.random.default_rng(seed)
    e = Euler(GAMMA)
    u = euler_states(rng, 5)
    n = rng.normal(size=(5, 2))
    lam, R, L = e.eigensystem(u, n)
    J = e.jacobian_dot_n(u, n)
    assert np.allclose(R @ L, np.eye(4), atol=1e-11)
    assert np.allclose(J @ R, R * lam[:, None, :], atol=1e-10 * (1 + np.abs(J).max()))


@given(st.integers(0, 10_000))
def test_eigen_split_parts(seed):
    rng = np.random.default_rng(seed)
    e = Euler(GAMMA)
    u = euler_states(rng, 4)
    n = rng.normal(size=(4, 2))
    s = eigen_split(e, u, n)
    J = e.jacobian_dot_n(u, n)
    assert np.allclose(s.plus + s.minus, J, atol=1e-10)
    assert np.allclose(s.plus - s.minus, s.abs, atol=1e-10)
    assert np.allclose(positive_part(e, u, n), s.plus)


@pytest.mark.parametrize("kind", ["rusanov", "roe", "roe_hartenyee"])
def test_numerical_flux_consistency_and_conservation(kind):
    rng = np.random.default_rng(0)
    e = Euler(GAMMA)
    uL, uR = euler_states(rng, 6), euler_states(rng, 6)
    n = rng.normal(size=(6, 2))
    assert np.allclose(numerical_flux(e, kind, uL, uL, n), e.flux_n(uL, n), atol=1e-12)
    assert np.allclose(numerical_flux(e, kind, uL, uR, n), -numerical_flux(e, kind, uR, uL, -n), atol=1e-12)


def test_roe_resolves_stationary_contact():
    e = Euler(GAMMA)
    uL = e.to_conservative(np.array([1.0, 0.0, 0.0, 1.0]))
    uR = e.to_conservative(np.array([0.2, 0.0, 0.0, 1.0]))
    f = roe(e, uL, uR, np.array([1.0, 0.0]), delta_factor=0.0)
    assert np.allclose(f, [0, 1, 0, 0], atol=1e-14)
    # the entropy fix widens the zero contact speed to delta/2 and diffuses it
    assert roe(e, uL, uR, np.array([1.0, 0.0]))[0] > 0


def test_harten_yee_fix():
    lam = np.array([-1.0, -0.05, 0.0, 0.05, 2.0])
    out = harten_yee(lam, 0.1)
    assert np.allclose(out[[0, 4]], [1.0, 2.0])
    assert out[2] == pytest.approx(0.05)  # delta / 2
    assert out[1] == pytest.approx((0.05 ** 2 + 0.01) / 0.2)
    assert np.all(out >= np.abs(lam))


def test_roe_falls_back_to_rusanov_on_bad_average():
    e = Euler(GAMMA)
    stats = FluxStats()
    uL = np.array([[1.0, 0.0, 0.0, 2.5]])
    uR = np.array([[1.0, 3.0, 0.0, 0.1]])  # negative pressure, Roe sound speed imaginary
    n = np.array([[1.0, 0.0]])
    f = roe(e, uL, uR, n, stats=stats)
    assert stats.roe_fallbacks == 1
    # the fallback is Rusanov, which itself propagates the inadmissible state as NaN
    assert np.array_equal(np.isnan(f), np.isnan(rusanov(e, uL, uR, n)))


def test_rusanov_is_dissipative_for_scalar():
    model = Advection(constant_field((1.0, 0.0)))
    n = np.array([[1.0, 0.0]])
    x = np.zeros((1, 2))
    f = rusanov(model, np.array([[1.0]]), np.array([[0.0]]), n, x)
    assert f[0, 0] == pytest.approx(1.0)  # upwind value


def test_rotation_field():
    v = rotation_field((0.5, 0.5))
    assert np.allclose(v(np.array([[1.0, 0.5], [0.5, 1.0]])), [[0, np.pi], [-np.pi, 0]])


def test_kpp_flux_and_speed():
    k = KPP()
    u = np.array([[0.3]])
    n = np.array([[0.6, 0.8]])
    assert np.allclose(k.flux_n(u, n), 0.6 * np.sin(0.3) + 0.8 * np.cos(0.3))
    assert np.allclose(k.speed_n(u, n), 0.6 * np.cos(0.3) - 0.8 * np.sin(0.3))


def test_advection_cache_ignores_writable_arrays():
    calls = []

    def field(x):
        calls.append(1)
        return np.ones_like(x)

    model = Advection(field)
    x = np.zeros((3, 2))
    model.speed_n(None, np.ones((3, 2)), x)
    model.speed_n(None, np.ones((3, 2)), x)
    assert len(calls) == 2
    x.setflags(write=False)
    model.speed_n(None, np.ones((3, 2)), x)
    model.speed_n(None, np.ones((3, 2)), x)
    assert len(calls) == 3


@pytest.mark.parametrize("model, u", [(Euler(GAMMA), None), (KPP(), np.array([[0.7], [2.0]]))])
def test_wave_scale_bounds_directional_speeds(model, u):
    rng = np.random.default_rng(3)
    if u is None:
        u = euler_states(rng, 2)
    n = np.array([[0.0, 2.0], [1.0, 1.0]])
    scale = model.wave_scale(u, n)
    for ang in np.linspace(0, 2 * np.pi, 16):
        d = np.linalg.norm(n, axis=1)[:, None] * np.array([np.cos(ang), np.sin(ang)])
        assert np.all(model.max_speed(u, d) <= scale + 1e-12)
