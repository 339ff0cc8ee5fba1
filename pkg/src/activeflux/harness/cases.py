"""Built-in test cases: models, domains, initial data, exact solutions and boundary conditions."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .. import boundary as bc
from ..loworder import LowOrderConfig
from ..mesh import Mesh, load_gmsh, refine_split_edges, structured_mesh
from ..models import Euler, KPP, Advection, rotation_field
from ..mood import MoodConfig

GAMMA = 1.4


@dataclass
class MeshSource:
    """Either a GMSH file (optionally split-refined) or a structured ``n x n`` grid."""

    domain: tuple = (0.0, 1.0, 0.0, 1.0)
    n: int = 20
    file: str | None = None
    refine: int = 1
    transform: Callable | None = None

    def build(self, n=None) -> Mesh:
        if self.file is not None:
            mesh = load_gmsh(self.file)
        else:
            k = self.n if n is None else n
            x0, x1, y0, y1 = self.domain
            ny = max(1, int(round(k * (y1 - y0) / (x1 - x0))))
            mesh = structured_mesh(k, ny, self.domain, self.transform)
        if self.refine in (2, 3):
            mesh = refine_split_edges(mesh, self.refine)
        return mesh


@dataclass
class CaseDefinition:
    name: str
    model: object
    mesh: MeshSource
    initial: Callable
    boundary: bc.BoundarySpec
    t_final: float
    order: int = 2
    exact: Callable | None = None
    mood: MoodConfig = field(default_factory=MoodConfig)
    loworder: LowOrderConfig = field(default_factory=LowOrderConfig)
    norm: str = "integral"  # "integral" or "mean" weighting of L1/L2
    error_component: int = 0
    convergence_sizes: tuple = (10, 20, 40)
    description: str = ""

    def with_(self, **kw):
        return replace(self, **kw)


def _const(state):
    state = np.asarray(state, dtype=float)

    def f(x):
        return np.broadcast_to(state, np.shape(x)[:-1] + state.shape).copy()

    return f


def _euler_piecewise(regions, default):
    """``regions``: list of (mask(x), primitive state); first match wins."""
    e = Euler(GAMMA)

    def f(x):
        w = np.broadcast_to(np.asarray(default, float), x.shape[:-1] + (4,)).copy()
        done = np.zeros(x.shape[:-1], bool)
        for mask, state in regions:
            sel = mask(x) & ~done
            w[sel] = state
            done |= sel
        return e.to_conservative(w)

    return f


# ---------------------------------------------------------------- scalar cases


def _rotate(x, center, angle):
    c, s = np.cos(angle), np.sin(angle)
    dx = x[..., 0] - center[0]
    dy = x[..., 1] - center[1]
    return np.stack([center[0] + c * dx - s * dy, center[1] + s * dx + c * dy], axis=-1)


def rotation_exact(u0, center, omega=2.0 * np.pi):
    def exact(x, t):
        return u0(_rotate(np.asarray(x, float), center, -omega * t))

    return exact


def gaussian(x):
    x = np.asarray(x, float)
    return np.exp(-((x[..., 0] - 5.0) ** 2 + (x[..., 1] - 5.0) ** 2))[..., None]


def rotation_gaussian(half_width=20.0):
    exact = rotation_exact(gaussian, (0.0, 0.0))
    L = float(half_width)
    return CaseDefinition(
        name="rotation_gaussian",
        model=Advection(rotation_field((0.0, 0.0))),
        mesh=MeshSource((-L, L, -L, L), n=80),
        initial=gaussian,
        exact=exact,
        boundary=bc.BoundarySpec.uniform(bc.exact_dirichlet(exact)),
        t_final=1.0,
        mood=MoodConfig(enabled=False, pad_bounds=(0.0, 1.0)),
        norm="integral",
        convergence_sizes=(40, 80, 160),
        description="Gaussian bump in solid-body rotation, one revolution",
    )


def zalesak_initial(x):
    x = np.asarray(x, float)
    X, Y = x[..., 0], x[..., 1]
    r1 = np.hypot(X - 0.25, Y - 0.5)
    r2 = np.hypot(X - 0.5, Y - 0.25)
    r3 = np.hypot(X - 0.5, Y - 0.75)
    u = np.zeros_like(X)
    u = np.where(r1 <= 0.15, 0.25 * (1.0 + np.cos(np.pi * r1 / 0.15)), u)
    u = np.where(r2 <= 0.15, 1.0 - r2 / 0.15, u)
    u = np.where(r3 <= 0.15, 1.0, u)
    slot = (np.abs(X - 0.5) <= 0.025) & (Y >= 0.6) & (Y <= 0.85)
    u = np.where(slot, 0.0, u)
    return u[..., None]


def zalesak():
    exact = rotation_exact(zalesak_initial, (0.5, 0.5))
    return CaseDefinition(
        name="zalesak",
        model=Advection(rotation_field((0.5, 0.5))),
        mesh=MeshSource((0.0, 1.0, 0.0, 1.0), n=64),
        initial=zalesak_initial,
        exact=exact,
        boundary=bc.BoundarySpec.uniform(bc.exact_dirichlet(exact)),
        t_final=1.0,
        mood=MoodConfig(pad_bounds=(0.0, 1.0), pad_tolerance=1e-5),
        description="Notched disk, cone and hump in solid-body rotation",
    )


def kpp_initial(x):
    x = np.asarray(x, float)
    inside = x[..., 0] ** 2 + (x[..., 1] - 0.5) ** 2 <= 1.0
    return np.where(inside, 3.5 * np.pi, 0.25 * np.pi)[..., None]


def kpp():
    return CaseDefinition(
        name="kpp",
        model=KPP(),
        mesh=MeshSource((-2.0, 2.0, -2.0, 2.0), n=64),
        initial=kpp_initial,
        boundary=bc.BoundarySpec.uniform(bc.neumann()),
        t_final=1.0,
        mood=MoodConfig(pad_bounds=(0.25 * np.pi, 3.5 * np.pi), pad_tolerance=1e-5),
        description="Non-convex flux (sin u, cos u) with a rotating composite wave",
    )


# ---------------------------------------------------------------- Euler cases


def vortex_stationary_primitive(x, eps=5.0, gamma=GAMMA):
    x = np.asarray(x, float)
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    dT = -(gamma - 1.0) * eps ** 2 / (8.0 * gamma * np.pi ** 2) * np.exp(1.0 - r2)
    rho = (1.0 + dT) ** (1.0 / (gamma - 1.0))
    f = eps / (2.0 * np.pi) * np.exp(0.5 * (1.0 - r2))
    return np.stack([rho, -f * x[..., 1], f * x[..., 0], rho ** gamma], axis=-1)


def euler_vortex_stationary():
    e = Euler(GAMMA)

    def init(x):
        return e.to_conservative(vortex_stationary_primitive(x))

    return CaseDefinition(
        name="euler_vortex_stationary",
        model=e,
        mesh=MeshSource((-10.0, 10.0, -10.0, 10.0), n=40),
        initial=init,
        exact=lambda x, t: init(x),
        boundary=bc.BoundarySpec.uniform(bc.exact_dirichlet(lambda x, t: init(x))),
        t_final=3.0,
        mood=MoodConfig(enabled=False),
        norm="mean",
        convergence_sizes=(40, 80),
        description="Isentropic vortex at rest",
    )


MOVING_VORTEX = dict(u_inf=1.0, v_inf=np.sqrt(2.0) / 2.0, M=5.0 / (2.0 * np.pi), x0=(-10.0, -10.0))


def vortex_moving_primitive(x, t=0.0, gamma=GAMMA):
    p = MOVING_VORTEX
    x = np.asarray(x, float)
    cx = p["x0"][0] + p["u_inf"] * t
    cy = p["x0"][1] + p["v_inf"] * t
    y1 = (x[..., 0] - cx) / 2.0
    y2 = (x[..., 1] - cy) / 2.0
    R = y1 ** 2 + y2 ** 2
    M = p["M"]
    dT = -(gamma - 1.0) / (2.0 * gamma) * M ** 2 * np.exp(1.0 - R)
    rho = (1.0 + dT) ** (1.0 / (gamma - 1.0))
    g = M * np.exp(0.5 * (1.0 - R))
    return np.stack([rho, p["u_inf"] - y2 * g, p["v_inf"] + y1 * g, rho ** gamma], axis=-1)


def euler_vortex_moving():
    e = Euler(GAMMA)

    def exact(x, t):
        return e.to_conservative(vortex_moving_primitive(x, t))

    return CaseDefinition(
        name="euler_vortex_moving",
        model=e,
        mesh=MeshSource((-20.0, 20.0, -20.0, 20.0), n=80),
        initial=lambda x: exact(x, 0.0),
        exact=exact,
        boundary=bc.BoundarySpec.uniform(bc.exact_dirichlet(exact)),
        t_final=20.0,
        mood=MoodConfig(enabled=False),
        norm="mean",
        convergence_sizes=(40, 80),
        description="Isentropic vortex advected by a uniform flow",
    )


def sod2d():
    init = _euler_piecewise([(lambda x: x[..., 0] ** 2 + x[..., 1] ** 2 <= 0.25, (1.0, 0.0, 0.0, 1.5))],
                            (0.125, 0.0, 0.0, 0.1))
    return CaseDefinition(
        name="sod2d",
        model=Euler(GAMMA),
        mesh=MeshSource((-1.0, 1.0, -1.0, 1.0), n=50),
        initial=init,
        boundary=bc.BoundarySpec.uniform(bc.wall()),
        t_final=0.16,
        description="Cylindrical Sod shock tube in a closed box",
    )


def liu_lax():
    X = lambda x: x[..., 0]
    Y = lambda x: x[..., 1]
    init = _euler_piecewise([
        (lambda x: (X(x) >= 0) & (Y(x) >= 0), (0.5313, 0.0, 0.0, 0.4)),
        (lambda x: (X(x) <= 0) & (Y(x) >= 0), (1.0, 0.7276, 0.0, 1.0)),
        (lambda x: (X(x) <= 0) & (Y(x) <= 0), (0.8, 0.0, 0.0, 1.0)),
    ], (1.0, 0.0, 0.7276, 1.0))
    return CaseDefinition(
        name="liu_lax",
        model=Euler(GAMMA),
        mesh=MeshSource((-2.0, 2.0, -2.0, 2.0), n=64),
        initial=init,
        boundary=bc.BoundarySpec.uniform(bc.neumann()),
        t_final=1.0,
        description="Four-state Riemann problem: two shocks and two slip lines",
    )


def kurganov_tadmor():
    X = lambda x: x[..., 0]
    Y = lambda x: x[..., 1]
    init = _euler_piecewise([
        (lambda x: (X(x) >= 1) & (Y(x) >= 1), (1.5, 0.0, 0.0, 1.5)),
        (lambda x: (X(x) <= 1) & (Y(x) >= 1), (0.5323, 1.206, 0.0, 0.3)),
        (lambda x: (X(x) <= 1) & (Y(x) <= 1), (0.138, 1.206, 1.206, 0.029)),
    ], (0.5323, 0.0, 1.206, 0.3))
    return CaseDefinition(
        name="kurganov_tadmor",
        model=Euler(GAMMA),
        mesh=MeshSource((0.0, 1.2, 0.0, 1.2), n=64),
        initial=init,
        boundary=bc.BoundarySpec.uniform(bc.neumann()),
        t_final=1.0,
        description="Four-shock Riemann problem",
    )


DMR_GEOMETRY = dict(x_min=-0.3, x_max=2.7, top=2.5, ramp_start=0.0, angle_deg=30.0)


def ramp_transform(geom=None):
    """Map the rectangle [x_min, x_max] x [0, 1] onto the channel above a ramp."""
    g = dict(DMR_GEOMETRY, **(geom or {}))
    slope = np.tan(np.radians(g["angle_deg"]))

    def transform(v):
        x, eta = v[:, 0], v[:, 1]
        bottom = slope * np.maximum(x - g["ramp_start"], 0.0)
        return np.stack([x, bottom + eta * (g["top"] - bottom)], axis=1)

    return transform


def dmr(geom=None):
    g = dict(DMR_GEOMETRY, **(geom or {}))
    e = Euler(GAMMA)
    left = (8.0, 8.25, 0.0, 116.5)
    right = (GAMMA, 0.0, 0.0, 1.0)
    init = _euler_piecewise([(lambda x: x[..., 0] < g["ramp_start"], left)], right)
    spec = bc.BoundarySpec({
        "left": bc.farfield(e.to_conservative(np.array(left))),
        "right": bc.neumann(),
        "top": bc.neumann(),
        "bottom": bc.wall(),
    })
    return CaseDefinition(
        name="dmr",
        model=e,
        mesh=MeshSource((g["x_min"], g["x_max"], 0.0, 1.0), n=120, transform=ramp_transform(g)),
        initial=init,
        boundary=spec,
        t_final=0.2,
        description="Mach 10 shock hitting a 30 degree ramp",
    )


_BUILDERS = {
    "rotation_gaussian": rotation_gaussian,
    "zalesak": zalesak,
    "kpp": kpp,
    "euler_vortex_stationary": euler_vortex_stationary,
    "euler_vortex_moving": euler_vortex_moving,
    "sod2d": sod2d,
    "liu_lax": liu_lax,
    "kurganov_tadmor": kurganov_tadmor,
    "dmr": dmr,
}

CASE_NAMES = tuple(_BUILDERS)


def make_case(name: str, **overrides) -> CaseDefinition:
    try:
        case = _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {', '.join(CASE_NAMES)}") from None
    return case.with_(**overrides) if overrides else case
