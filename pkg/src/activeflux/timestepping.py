"""SSP-RK3 time integration with CFL control and MOOD correction."""
from __future__ import annotations

import logging
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .space import SolutionState

logger = logging.getLogger(__name__)

# Shu-Osher coefficients: u_{k+1} = a_k u^n + b_k (u_k + dt L(u_k)), stage time offsets c_k
SSP_A = (0.0, 0.75, 1.0 / 3.0)
SSP_B = (1.0, 0.25, 2.0 / 3.0)
SSP_C = (1.0, 0.5, 1.0)
# weights of the stage fluxes in the cycle's effective flux
SSP_FLUX_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)


class TimeSteppingError(RuntimeError):
    pass


@dataclass
class TimeConfig:
    cfl: float = 0.4
    t_final: float = 1.0
    paper_stability: bool = False
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.cfl > 0:
            raise ValueError("CFL must be positive")
        if not self.t_final >= 0:
            raise ValueError("final time must be nonnegative")

    def effective_cfl(self, order):
        if not self.paper_stability:
            return self.cfl
        return self.cfl / {1: 1, 2: 2, 3: 3}[order]


def max_wave_speed(scheme, state) -> np.ndarray:
    """Largest wave speed over each element's DoFs and all unit directions, shape (T,)."""
    sp, model = scheme.space, scheme.model
    ex = np.array([1.0, 0.0])
    pts = model.wave_scale(state.point_values, np.broadcast_to(ex, sp.point_xy.shape), sp.point_xy)
    avg = model.wave_scale(state.averages, np.broadcast_to(ex, sp.centroids.shape), sp.centroids)
    return np.maximum(pts[sp.dofmap.tri_points].max(axis=1), avg)


def compute_dt(scheme, state, config: TimeConfig) -> float:
    """``CFL * min_E 2|E| / (perimeter_E * lambda_max,E)``, clipped to land on ``t_final``."""
    remaining = config.t_final - state.time
    lam = max_wave_speed(scheme, state)
    with np.errstate(divide="ignore", invalid="ignore"):
        local = scheme.space.length_scale / lam
    local = local[np.isfinite(local) & (lam > 0)]
    cfl = config.effective_cfl(scheme.space.order)
    dt = cfl * float(local.min()) if local.size else np.inf
    return float(min(dt, remaining))


@dataclass
class StepInfo:
    dt: float
    flags: object = None
    fluxes: np.ndarray | None = None


def _apply(operator, state, rhs_pts, rhs_avg, a, b, un, dt, t_new):
    pts = a * un.point_values + b * (state.point_values + dt * rhs_pts)
    avg = a * un.averages + b * (state.averages + dt * rhs_avg)
    out = SolutionState(pts, avg, t_new)
    constrain = getattr(operator, "constrain", None)
    if constrain is not None:
        constrain(out)
    return out


def ssprk3_step(state: SolutionState, dt: float, operator, mood=None) -> tuple[SolutionState, StepInfo]:
    """One Shu-Osher SSP-RK3 step.

    ``operator(state)`` returns ``(point_rhs, average_rhs, face_fluxes)``.
    With a :class:`~activeflux.mood.MoodLimiter` the cycle is checked once at
    the end (or after every stage when its config asks for it).
    """
    un = state
    u = state
    F_eff = None
    flags = None
    per_stage = mood is not None and mood.config.enabled and mood.config.per_stage
    for k in range(3):
        rp, ra, F = operator(u)
        t_new = un.time + SSP_C[k] * dt
        nxt = _apply(operator, u, rp, ra, SSP_A[k], SSP_B[k], un, dt, t_new)
        if per_stage:
            nxt, f, F = mood.correct(u, nxt, F, dt, a=SSP_A[k], b=SSP_B[k], base=u)
            nxt = _constrained(operator, nxt)
            if flags is None:
                flags = f
            else:
                flags.merge(f)
        if F is not None:
            F_eff = SSP_FLUX_WEIGHTS[k] * F if F_eff is None else F_eff + SSP_FLUX_WEIGHTS[k] * F
        u = nxt
    u.time = un.time + dt
    if mood is not None and mood.config.enabled and not per_stage:
        u, flags, F_eff = mood.correct(un, u, F_eff, dt)
        u = _constrained(operator, u)
    return u, StepInfo(dt, flags, F_eff)


def _constrained(operator, state):
    constrain = getattr(operator, "constrain", None)
    if constrain is not None:
        constrain(state)
    return state


@dataclass
class RunLog:
    steps: int = 0
    dts: list = field(default_factory=list)
    times: list = field(default_factory=list)
    flag_counts: list = field(default_factory=list)
    wall_time: float = 0.0
    last_flags: object = None

    def lines(self):
        """Line-oriented log: step, t, dt and flag counts."""
        out = []
        for i, (t, dt) in enumerate(zip(self.times, self.dts)):
            counts = self.flag_counts[i] if i < len(self.flag_counts) else {}
            c = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
            out.append(f"step={i + 1} t={t:.12g} dt={dt:.6e} {c}".rstrip())
        return out


def run_to_time(scheme, state: SolutionState, config: TimeConfig, mood=None, callback=None):
    """Advance ``state`` to ``config.t_final``; returns ``(state, RunLog)``."""
    log = RunLog()
    start = _time.perf_counter()
    u = _constrained(scheme, state.copy())
    while u.time < config.t_final:
        if log.steps >= config.max_steps:
            raise TimeSteppingError(f"maximum number of steps ({config.max_steps}) exceeded at t={u.time}")
        dt = compute_dt(scheme, u, config)
        if not dt > 0:
            raise TimeSteppingError(f"non-positive time step at t={u.time}")
        last = config.t_final - u.time <= dt * (1 + 1e-12)
        u, info = ssprk3_step(u, dt, scheme, mood)
        if last:
            u.time = config.t_final
        log.steps += 1
        log.dts.append(dt)
        log.times.append(u.time)
        log.flag_counts.append(info.flags.counts() if info.flags is not None else {})
        log.last_flags = info.flags
        if not u.is_finite():
            raise TimeSteppingError(f"non-finite state after step {log.steps} (t={u.time})")
        if callback is not None:
            callback(u, info)
    log.wall_time = _time.perf_counter() - start
    return u, log
