"""Hyperbolic systems: fluxes, Jacobians, eigen-splittings and numerical fluxes.

States are arrays whose last axis holds the ``m`` components; normals are
arrays with a trailing axis of length 2 and need not be unit vectors.  The
scalar models carry an optional position ``x`` because the advection flux
depends on it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InadmissibleStateError(ValueError):
    """Raised when an extractor is asked for a state outside the invariant domain."""


def _norm(n):
    return np.sqrt(n[..., 0] ** 2 + n[..., 1] ** 2)


def _frozen(a):
    """True when neither ``a`` nor any array it views can be written to."""
    while isinstance(a, np.ndarray):
        if a.flags.writeable:
            return False
        a = a.base
    return a is None


class FluxModel:
    m = 1
    names: tuple = ("u",)

    def flux(self, u, x=None):
        """Physical flux, shape (..., m, 2)."""
        raise NotImplementedError

    def flux_n(self, u, n, x=None):
        f = self.flux(u, x)
        return f[..., 0] * n[..., None, 0] + f[..., 1] * n[..., None, 1]

    def jac_grad(self, u, grad, x=None):
        """``J(u) . grad u`` for a gradient of shape (..., m, 2)."""
        raise NotImplementedError

    def jacobian_dot_n(self, u, n, x=None):
        """Matrix ``A n_x + B n_y``, shape (..., m, m)."""
        raise NotImplementedError

    def eigensystem(self, u, n, x=None):
        """Eigenvalues (..., m) and right/left eigenvectors (..., m, m) of ``J . n`` (any n)."""
        raise NotImplementedError

    def max_speed(self, u, n, x=None):
        """Spectral radius of ``J(u) . n``."""
        raise NotImplementedError

    def admissible(self, u):
        return np.all(np.isfinite(u), axis=-1)

    def wave_scale(self, u, n, x=None):
        """Largest spectral radius of ``J(u) . d`` over directions ``d`` with ``|d| = |n|``."""
        raise NotImplementedError

    def fan_speed(self, uL, uR, n, x=None):
        """Bound on the wave speeds of the Riemann problem ``(uL, uR)`` across ``n``."""
        return np.maximum(self.max_speed(uL, n, x), self.max_speed(uR, n, x))


class ScalarModel(FluxModel):
    m = 1

    def speed_n(self, u, n, x=None):
        """The single eigenvalue of ``J(u) . n``, shape (...)."""
        raise NotImplementedError

    def jacobian_dot_n(self, u, n, x=None):
        return self.speed_n(u, n, x)[..., None, None]

    def eigensystem(self, u, n, x=None):
        lam = self.speed_n(u, n, x)[..., None]
        one = np.ones(lam.shape + (1,))
        return lam, one, one

    def max_speed(self, u, n, x=None):
        return np.abs(self.speed_n(u, n, x))

    def jac_grad(self, u, grad, x=None):
        fx, fy = self.flux_derivative(u, x)
        return fx * grad[..., 0] + fy * grad[..., 1]

    def flux_derivative(self, u, x=None):
        """(f_x'(u), f_y'(u)), each shaped like ``u``."""
        raise NotImplementedError

    def wave_scale(self, u, n, x=None):
        fx, fy = self.flux_derivative(u, x)
        return np.hypot(fx[..., 0], fy[..., 0]) * _norm(n)


class Advection(ScalarModel):
    """Linear advection ``u_t + div(a(x) u) = 0`` with a divergence-free velocity field."""

    _CACHE_SIZE = 32
    linear = True

    def __init__(self, velocity):
        self.velocity = velocity
        self._cache = {}

    def _memo(self, tag, arrays, compute):
        """Reuse results computed on read-only tables; anything writable is recomputed."""
        if not all(_frozen(a) for a in arrays):
            return compute()
        key = (tag,) + tuple(id(a) for a in arrays)
        hit = self._cache.get(key)
        if hit is not None and all(h is a for h, a in zip(hit[0], arrays)):
            return hit[1]
        out = np.array(compute(), dtype=float)
        out.setflags(write=False)
        if len(self._cache) >= self._CACHE_SIZE:
            self._cache.pop(next(iter(self._cache)))
        self._cache[key] = (arrays, out)
        return out

    def _a(self, x, shape=None):
        if x is None:
            raise ValueError("advection needs positions")
        return self._memo("a", (x,), lambda: self.velocity(np.asarray(x, dtype=float)))

    def wave_scale(self, u, n, x=None):
        a = self._a(x)
        return self._memo("scale", (x, n), lambda: np.hypot(a[..., 0], a[..., 1]) * _norm(n))

    def flux(self, u, x=None):
        a = self._a(x, u.shape)
        return u[..., None] * a[..., None, :]

    def flux_n(self, u, n, x=None):
        a = self._a(x, u.shape)
        an = a[..., 0] * n[..., 0] + a[..., 1] * n[..., 1]
        return u * an[..., None]

    def speed_n(self, u, n, x=None):
        a = self._a(x, None)
        return a[..., 0] * n[..., 0] + a[..., 1] * n[..., 1]

    def flux_derivative(self, u, x=None):
        a = self._a(x, None)
        return a[..., None, 0], a[..., None, 1]

    def jac_grad(self, u, grad, x=None):
        a = self._a(x, None)
        return a[..., None, 0] * grad[..., 0] + a[..., None, 1] * grad[..., 1]


def rotation_field(center=(0.0, 0.0), omega=2.0 * np.pi):
    """Solid-body rotation ``omega * (-(y - y0), x - x0)``."""
    cx, cy = center

    def velocity(x):
        return np.stack([-omega * (x[..., 1] - cy), omega * (x[..., 0] - cx)], axis=-1)

    velocity.center = (cx, cy)
    velocity.omega = omega
    return velocity


def constant_field(a):
    a = np.asarray(a, dtype=float)

    def velocity(x):
        return np.broadcast_to(a, np.shape(x)[:-1] + (2,))

    return velocity


def advection_model(velocity) -> Advection:
    return Advection(velocity)


class KPP(ScalarModel):
    """Non-convex flux ``f(u) = (sin u, cos u)``."""

    def flux(self, u, x=None):
        return np.stack([np.sin(u), np.cos(u)], axis=-1)

    def flux_n(self, u, n, x=None):
        return np.sin(u) * n[..., None, 0] + np.cos(u) * n[..., None, 1]

    def speed_n(self, u, n, x=None):
        u0 = u[..., 0]
        return np.cos(u0) * n[..., 0] - np.sin(u0) * n[..., 1]

    def flux_derivative(self, u, x=None):
        return np.cos(u), -np.sin(u)

    def fan_speed(self, uL, uR, n, x=None):
        # f'(u).n = |n| cos(u + phi); the fan covers every state between uL and uR
        nn = _norm(n)
        phi = np.arctan2(n[..., 1], n[..., 0])
        lo = np.minimum(uL[..., 0], uR[..., 0]) + phi
        hi = np.maximum(uL[..., 0], uR[..., 0]) + phi
        crest = np.floor(hi / np.pi) >= np.ceil(lo / np.pi)
        ends = np.maximum(self.max_speed(uL, n, x), self.max_speed(uR, n, x))
        return np.where(crest, nn, ends)


def kpp_model() -> KPP:
    return KPP()


class Euler(FluxModel):
    """Compressible Euler equations for a perfect gas, state ``(rho, rho u, rho v, E)``."""

    m = 4
    names = ("rho", "rhou", "rhov", "E")

    def __init__(self, gamma=1.4):
        if not gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        self.gamma = float(gamma)

    # conversions
    def pressure(self, u):
        rho = u[..., 0]
        return (self.gamma - 1.0) * (u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho)

    def density(self, u):
        return u[..., 0]

    def to_conservative(self, w):
        """From primitive ``(rho, u, v, p)``."""
        w = np.asarray(w, dtype=float)
        rho, vx, vy, p = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
        E = p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy)
        return np.stack([rho, rho * vx, rho * vy, E], axis=-1)

    def to_primitive(self, u, check=False):
        u = np.asarray(u, dtype=float)
        if check and not np.all(self.admissible(u)):
            raise InadmissibleStateError("state outside the invariant domain")
        rho = u[..., 0]
        return np.stack([rho, u[..., 1] / rho, u[..., 2] / rho, self.pressure(u)], axis=-1)

    def sound_speed(self, u):
        return np.sqrt(self.gamma * self.pressure(u) / u[..., 0])

    def admissible(self, u):
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = np.all(np.isfinite(u), axis=-1) & (u[..., 0] > 0)
            ok &= self.pressure(u) > 0
        return ok

    def flux(self, u, x=None):
        rho, mx, my, E = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
        vx, vy = mx / rho, my / rho
        p = (self.gamma - 1.0) * (E - 0.5 * (mx * vx + my * vy))
        fx = np.stack([mx, mx * vx + p, my * vx, (E + p) * vx], axis=-1)
        fy = np.stack([my, mx * vy, my * vy + p, (E + p) * vy], axis=-1)
        return np.stack([fx, fy], axis=-1)

    def flux_n(self, u, n, x=None):
        rho, mx, my, E = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
        vx, vy = mx / rho, my / rho
        p = (self.gamma - 1.0) * (E - 0.5 * (mx * vx + my * vy))
        nx, ny = n[..., 0], n[..., 1]
        vn = vx * nx + vy * ny
        return np.stack([rho * vn, mx * vn + p * nx, my * vn + p * ny, (E + p) * vn], axis=-1)

    def jvp_n(self, u, du, n):
        """Directional flux Jacobian applied to ``du``: ``(J(u) . n) du``."""
        g1 = self.gamma - 1.0
        rho, mx, my, E = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
        vx, vy = mx / rho, my / rho
        p = g1 * (E - 0.5 * (mx * vx + my * vy))
        drho, dmx, dmy, dE = du[..., 0], du[..., 1], du[..., 2], du[..., 3]
        dvx = (dmx - vx * drho) / rho
        dvy = (dmy - vy * drho) / rho
        dp = g1 * (dE - vx * dmx - vy * dmy + 0.5 * (vx * vx + vy * vy) * drho)
        nx, ny = n[..., 0], n[..., 1]
        vn = vx * nx + vy * ny
        dvn = dvx * nx + dvy * ny
        return np.stack([
            dmx * nx + dmy * ny,
            dmx * vn + mx * dvn + dp * nx,
            dmy * vn + my * dvn + dp * ny,
            (dE + dp) * vn + (E + p) * dvn,
        ], axis=-1)

    def jac_grad(self, u, grad, x=None):
        ex = np.zeros(grad.shape[:-2] + (2,))
        ex[..., 0] = 1.0
        ey = np.zeros_like(ex)
        ey[..., 1] = 1.0
        return self.jvp_n(u, grad[..., 0], ex) + self.jvp_n(u, grad[..., 1], ey)

    def jacobian_dot_n(self, u, n, x=None):
        u = np.asarray(u, dtype=float)
        n = np.broadcast_to(np.asarray(n, dtype=float), u.shape[:-1] + (2,))
        cols = []
        for k in range(4):
            e = np.zeros(u.shape)
            e[..., k] = 1.0
            cols.append(self.jvp_n(u, e, n))
        return np.stack(cols, axis=-1)

    def eigensystem(self, u, n, x=None):
        n = np.asarray(n, dtype=float)
        rho = u[..., 0]
        vx, vy = u[..., 1] / rho, u[..., 2] / rho
        p = self.pressure(u)
        with np.errstate(invalid="ignore"):
            c = np.sqrt(self.gamma * p / rho)
        H = (u[..., 3] + p) / rho
        nn = _norm(n)
        lam, R, L = self._eigvecs(vx, vy, H, c, n[..., 0] / nn, n[..., 1] / nn)
        return lam * nn[..., None], R, L

    def _eigvecs(self, vx, vy, H, c, nx, ny):
        """Eigen-decomposition of ``J . n`` for a unit normal from (u, v, H, c)."""
        g1 = self.gamma - 1.0
        vn = vx * nx + vy * ny
        q2 = vx * vx + vy * vy
        shape = vn.shape
        lam = np.empty(shape + (4,))
        lam[..., 0] = vn - c
        lam[..., 1] = vn
        lam[..., 2] = vn
        lam[..., 3] = vn + c
        R = np.empty(shape + (4, 4))
        R[..., 0, :] = (1.0, 1.0, 0.0, 1.0)
        R[..., 1, 0] = vx - c * nx
        R[..., 1, 1] = vx
        R[..., 1, 2] = -ny
        R[..., 1, 3] = vx + c * nx
        R[..., 2, 0] = vy - c * ny
        R[..., 2, 1] = vy
        R[..., 2, 2] = nx
        R[..., 2, 3] = vy + c * ny
        R[..., 3, 0] = H - c * vn
        R[..., 3, 1] = 0.5 * q2
        R[..., 3, 2] = vy * nx - vx * ny
        R[..., 3, 3] = H + c * vn
        with np.errstate(divide="ignore", invalid="ignore"):
            b1 = g1 / (c * c)
            ic = 1.0 / c
        b2 = 0.5 * b1 * q2
        L = np.empty(shape + (4, 4))
        L[..., 0, 0] = 0.5 * (b2 + vn * ic)
        L[..., 0, 1] = 0.5 * (-b1 * vx - nx * ic)
        L[..., 0, 2] = 0.5 * (-b1 * vy - ny * ic)
        L[..., 0, 3] = 0.5 * b1
        L[..., 1, 0] = 1.0 - b2
        L[..., 1, 1] = b1 * vx
        L[..., 1, 2] = b1 * vy
        L[..., 1, 3] = -b1
        L[..., 2, 0] = vx * ny - vy * nx
        L[..., 2, 1] = -ny
        L[..., 2, 2] = nx
        L[..., 2, 3] = 0.0
        L[..., 3, 0] = 0.5 * (b2 - vn * ic)
        L[..., 3, 1] = 0.5 * (-b1 * vx + nx * ic)
        L[..., 3, 2] = 0.5 * (-b1 * vy + ny * ic)
        L[..., 3, 3] = 0.5 * b1
        return lam, R, L

    def max_speed(self, u, n, x=None):
        rho = u[..., 0]
        with np.errstate(invalid="ignore"):
            c = np.sqrt(self.gamma * self.pressure(u) / rho)
        vn = (u[..., 1] * n[..., 0] + u[..., 2] * n[..., 1]) / rho
        return np.abs(vn) + c * _norm(n)

    def wave_scale(self, u, n, x=None):
        rho = u[..., 0]
        with np.errstate(invalid="ignore"):
            c = np.sqrt(self.gamma * self.pressure(u) / rho)
        v = np.hypot(u[..., 1], u[..., 2]) / rho
        return (v + c) * _norm(n)


def euler_model(gamma=1.4) -> Euler:
    return Euler(gamma)


@dataclass
class EigenSplit:
    plus: np.ndarray
    minus: np.ndarray
    sign: np.ndarray
    abs: np.ndarray

    @property
    def full(self):
        return self.plus + self.minus


def eigen_split(model: FluxModel, u, n, x=None) -> EigenSplit:
    """Positive/negative parts of ``K = J(u) . n`` via ``K = R diag(lambda) R^-1``."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    if model.m == 1:
        k = model.speed_n(u, n, x)[..., None, None]
        return EigenSplit(np.maximum(k, 0.0), np.minimum(k, 0.0), np.sign(k), np.abs(k))
    lam, R, L = model.eigensystem(u, n, x)
    if not np.all(np.isfinite(lam)):
        raise np.linalg.LinAlgError("eigendecomposition failed: inadmissible or degenerate state")

    def build(d):
        return np.matmul(R * d[..., None, :], L)

    return EigenSplit(build(np.maximum(lam, 0.0)), build(np.minimum(lam, 0.0)),
                      build(np.sign(lam)), build(np.abs(lam)))


def positive_part(model: FluxModel, u, n, x=None):
    """Only ``K+``; no finiteness check so that NaNs propagate to the MOOD detectors."""
    if model.m == 1:
        return np.maximum(model.speed_n(u, n, x), 0.0)[..., None, None]
    lam, R, L = model.eigensystem(u, n, x)
    return np.matmul(R * np.maximum(lam, 0.0)[..., None, :], L)


def harten_yee(lam, delta):
    """Entropy-fixed ``|lambda|``: ``(lambda^2 + delta^2) / (2 delta)`` inside ``|lambda| < delta``."""
    a = np.abs(lam)
    with np.errstate(invalid="ignore", divide="ignore"):
        fixed = (lam * lam + delta * delta) / (2.0 * delta)
    return np.where(a < delta, fixed, a)


class FluxStats:
    """Diagnostic tally of Roe-average failures that fell back to Rusanov."""

    def __init__(self):
        self.roe_fallbacks = 0

    def merge(self, other):
        self.roe_fallbacks += other.roe_fallbacks


def rusanov(model, uL, uR, n, x=None):
    alpha = model.fan_speed(uL, uR, n, x)
    return 0.5 * (model.flux_n(uL, n, x) + model.flux_n(uR, n, x)) - 0.5 * alpha[..., None] * (uR - uL)


def roe(model, uL, uR, n, x=None, delta_factor=0.1, stats: FluxStats | None = None):
    n = np.asarray(n, dtype=float)
    central = 0.5 * (model.flux_n(uL, n, x) + model.flux_n(uR, n, x))
    if model.m == 1:
        du = (uR - uL)[..., 0]
        dflux = (model.flux_n(uR, n, x) - model.flux_n(uL, n, x))[..., 0]
        small = np.abs(du) <= 1e-12 * (1.0 + np.abs(uL[..., 0]) + np.abs(uR[..., 0]))
        with np.errstate(invalid="ignore", divide="ignore"):
            lam = np.where(small, model.speed_n(0.5 * (uL + uR), n, x), dflux / np.where(small, 1.0, du))
        delta = delta_factor * np.maximum(model.max_speed(uL, n, x), model.max_speed(uR, n, x))
        return central - 0.5 * (harten_yee(lam, delta) * du)[..., None]

    g1 = model.gamma - 1.0
    nn = _norm(n)
    nx, ny = n[..., 0] / nn, n[..., 1] / nn
    rL, rR = uL[..., 0], uR[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        sL, sR = np.sqrt(rL), np.sqrt(rR)
        pL, pR = model.pressure(uL), model.pressure(uR)
        HL, HR = (uL[..., 3] + pL) / rL, (uR[..., 3] + pR) / rR
        vxt = (uL[..., 1] / sL + uR[..., 1] / sR) / (sL + sR)
        vyt = (uL[..., 2] / sL + uR[..., 2] / sR) / (sL + sR)
        Ht = (sL * HL + sR * HR) / (sL + sR)
        c2 = g1 * (Ht - 0.5 * (vxt ** 2 + vyt ** 2))
        bad = ~(np.isfinite(c2) & (c2 > 0))
        ct = np.sqrt(np.where(bad, 1.0, c2))
        lam, R, L = model._eigvecs(vxt, vyt, Ht, ct, nx, ny)
        delta = delta_factor * (np.abs(vxt * nx + vyt * ny) + ct)
        alam = harten_yee(lam, delta[..., None])
        waves = np.matmul(L, (uR - uL)[..., None])[..., 0]
        diss = np.matmul(R, (alam * waves)[..., None])[..., 0]
        out = central - 0.5 * nn[..., None] * diss
    if np.any(bad):
        if stats is not None:
            stats.roe_fallbacks += int(np.count_nonzero(bad))
        out = np.where(bad[..., None], rusanov(model, uL, uR, n, x), out)
    return out


def numerical_flux(model, kind, uL, uR, n, x=None, delta_factor=0.1, stats=None):
    """Two-point flux ``F(uL, uR, n)`` integrated against the (possibly scaled) normal ``n``."""
    if kind == "rusanov":
        return rusanov(model, uL, uR, n, x)
    if kind in ("roe", "roe_hartenyee"):
        return roe(model, uL, uR, n, x, delta_factor, stats)
    raise ValueError(f"unknown numerical flux {kind!r}")
