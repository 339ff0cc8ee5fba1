"""Discrete error norms and convergence rates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NORM_MODES = ("integral", "mean")


@dataclass
class Norms:
    L1: float
    L2: float
    Linf: float

    def as_tuple(self):
        return (self.L1, self.L2, self.Linf)


@dataclass
class ErrorReport:
    h: float
    points: Norms
    averages: Norms
    n_triangles: int = 0
    extra: dict = field(default_factory=dict)

    def get(self, quantity):
        return self.points if quantity == "points" else self.averages


def weighted_norms(err, weights, mode="integral") -> Norms:
    """``err``: (n,) absolute errors; ``weights``: cell measures summing to the domain area."""
    if mode not in NORM_MODES:
        raise ValueError(f"unknown norm mode {mode!r}")
    err = np.abs(np.asarray(err, float))
    w = np.asarray(weights, float)
    if mode == "mean":
        w = w / w.sum()
    return Norms(float(np.sum(w * err)), float(np.sqrt(np.sum(w * err ** 2))), float(err.max(initial=0.0)))


def error_norms(space, state, exact, component=0, mode="integral") -> ErrorReport:
    """Errors of the point values (weights ``|C_s|``) and averages (weights ``|E|``).

    Dual measures sum to two thirds of the domain, so they are rescaled to the
    domain area; both quantities then share the same normalisation.
    """
    if exact is None:
        raise ValueError("case has no exact solution")
    mesh = space.mesh
    area = mesh.areas.sum()
    t = state.time
    pe = state.point_values[:, component] - exact(space.point_xy, t)[:, component]
    exact_avg = space.interpolate(lambda x: exact(x, t), t).averages[:, component]
    ae = state.averages[:, component] - exact_avg
    wp = space.dual_measure * (area / space.dual_measure.sum())
    return ErrorReport(
        h=mesh.characteristic_size(),
        points=weighted_norms(pe, wp, mode),
        averages=weighted_norms(ae, mesh.areas, mode),
        n_triangles=mesh.n_triangles,
    )


def rate(e_coarse, e_fine, h_coarse, h_fine):
    if e_coarse <= 0 or e_fine <= 0:
        return math.nan
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def rate_table(reports, quantity="points"):
    """Rows ``(h, L1, rate1, L2, rate2, Linf, rateinf)``; the first row's rates are NaN."""
    rows = []
    for i, r in enumerate(reports):
        n = r.get(quantity)
        row = [r.h]
        for k, e in enumerate(n.as_tuple()):
            if i == 0:
                rr = math.nan
            else:
                prev = reports[i - 1]
                rr = rate(prev.get(quantity).as_tuple()[k], e, prev.h, r.h)
            row += [e, rr]
        rows.append(tuple(row))
    return rows


CSV_HEADER = "h,L1,rate1,L2,rate2,Linf,rateinf"


def format_csv(rows) -> str:
    def fmt(v):
        return "" if isinstance(v, float) and math.isnan(v) else f"{v:.6e}"

    lines = [CSV_HEADER]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
