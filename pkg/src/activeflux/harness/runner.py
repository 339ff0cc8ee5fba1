"""Assemble and run cases: single simulations and mesh-refinement studies."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..highorder import Scheme
from ..mood import MoodLimiter
from ..space import SolutionState, Space
from ..timestepping import RunLog, TimeConfig, run_to_time
from .cases import CaseDefinition
from .norms import ErrorReport, error_norms

logger = logging.getLogger(__name__)


@dataclass
class Problem:
    case: CaseDefinition
    space: Space
    scheme: Scheme
    limiter: MoodLimiter | None
    initial: SolutionState


@dataclass
class RunResult:
    problem: Problem
    state: SolutionState
    log: RunLog
    errors: ErrorReport | None = None

    @property
    def flags(self):
        return self.log.last_flags


def build_problem(case: CaseDefinition, n=None, variant="positive") -> Problem:
    mesh = case.mesh.build(n)
    space = Space(mesh, case.order)
    case.boundary.validate(mesh, case.model)
    scheme = Scheme.build(space, case.model, case.boundary, case.loworder, variant)
    limiter = MoodLimiter(scheme, case.mood) if case.mood.enabled else None
    return Problem(case, space, scheme, limiter, space.interpolate(case.initial))


def run_case(case: CaseDefinition, time: TimeConfig | None = None, n=None, variant="positive",
             callback=None) -> RunResult:
    time = time or TimeConfig(t_final=case.t_final)
    prob = build_problem(case, n, variant)
    state, log = run_to_time(prob.scheme, prob.initial, time, prob.limiter, callback)
    errors = None
    if case.exact is not None:
        errors = error_norms(prob.space, state, case.exact, case.error_component, case.norm)
    logger.info("%s: %d steps, %.1fs", case.name, log.steps, log.wall_time)
    return RunResult(prob, state, log, errors)


def convergence_study(case: CaseDefinition, sizes=None, time: TimeConfig | None = None,
                      variant="positive"):
    """Run the case on every mesh size; returns the list of error reports (coarse to fine)."""
    if case.exact is None:
        raise ValueError(f"case {case.name} has no exact solution")
    reports = []
    for n in sizes or case.convergence_sizes:
        res = run_case(case, time, n, variant)
        reports.append(res.errors)
    return reports


def mood_flag_fraction(result: RunResult) -> float:
    flags = result.flags
    if flags is None:
        return 0.0
    return float(np.count_nonzero(flags.triangles)) / result.problem.space.n_triangles
