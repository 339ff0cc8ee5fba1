"""A-posteriori MOOD limiting.

After a high-order Runge-Kutta cycle every average and point value is tested
by a cascade of detectors: computer admissibility (finite numbers), physical
admissibility (state in the invariant domain) and a relaxed discrete maximum
principle on a few functionals, skipped on plateaus.  Troubled averages flag
all their faces, whose fluxes are recomputed first-order from the data at the
start of the cycle; troubled point values are recomputed with the first-order
sub-element scheme.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .highorder import averages_from_fluxes
from .loworder import loworder_average_rhs, loworder_face_fluxes, loworder_point_rhs
from .space import SolutionState

NONE, CAD, PAD, DMP = 0, 1, 2, 3
CAUSES = {CAD: "CAD", PAD: "PAD", DMP: "DMP"}


@dataclass
class MoodConfig:
    enabled: bool = True
    cad: bool = True
    pad: bool = True
    dmp: bool = True
    pad_bounds: tuple | None = None  # scalar invariant interval (lo, hi)
    pad_tolerance: float = 1e-5
    delta0: float = 1e-4
    delta1: float = 1e-3
    plateau_tolerance: float = 1e-10
    per_stage: bool = False
    max_substeps: int = 64  # first-order fallback subcycling limit for point values

    def __post_init__(self):
        for name in ("pad_tolerance", "delta0", "delta1", "plateau_tolerance"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class MoodFlags:
    triangles: np.ndarray
    edges: np.ndarray
    points: np.ndarray
    triangle_cause: np.ndarray
    point_cause: np.ndarray

    @classmethod
    def empty(cls, n_tri, n_edge, n_pts):
        return cls(np.zeros(n_tri, bool), np.zeros(n_edge, bool), np.zeros(n_pts, bool),
                   np.zeros(n_tri, np.int8), np.zeros(n_pts, np.int8))

    def counts(self):
        out = {}
        for code, name in CAUSES.items():
            out[f"tri_{name}"] = int(np.count_nonzero(self.triangle_cause == code))
            out[f"pt_{name}"] = int(np.count_nonzero(self.point_cause == code))
        out["edges"] = int(np.count_nonzero(self.edges))
        return out

    @property
    def any(self):
        return bool(self.triangles.any() or self.points.any())

    def merge(self, other):
        """Union; flags only ever grow."""
        new_t = other.triangles & ~self.triangles
        new_p = other.points & ~self.points
        self.triangle_cause[new_t] = other.triangle_cause[new_t]
        self.point_cause[new_p] = other.point_cause[new_p]
        self.triangles |= other.triangles
        self.points |= other.points
        self.edges |= other.edges


def _csr_from_bool(mat):
    mat = sparse.csr_matrix(mat, dtype=bool)
    mat.sort_indices()
    return mat


class Neighbourhoods:
    """Index sets for the DMP bounds and the plateau test."""

    def __init__(self, space):
        mesh = space.mesh
        T, P = mesh.n_triangles, space.n_points
        tv = sparse.csr_matrix((np.ones(3 * T), (np.repeat(np.arange(T), 3), mesh.triangles.ravel())),
                               shape=(T, mesh.n_vertices))
        # face-or-vertex patch including the element itself
        self.tri_patch = _csr_from_bool((tv @ tv.T) > 0)
        nb = mesh.triangle_neighbours()
        rows = np.concatenate([np.arange(T), np.repeat(np.arange(T), 3)])
        cols = np.concatenate([np.arange(T), nb.ravel()])
        keep = cols >= 0
        self.tri_face_patch = _csr_from_bool(sparse.csr_matrix(
            (np.ones(keep.sum()), (rows[keep], cols[keep])), shape=(T, T)))
        npt = space.n_local
        pt = sparse.csr_matrix((np.ones(T * npt), (space.dofmap.tri_points.ravel(), np.repeat(np.arange(T), npt))),
                               shape=(P, T))
        self.point_incident = _csr_from_bool(pt)
        self.point_patch = _csr_from_bool((pt @ self.tri_patch.astype(float)) > 0)
        self.tri_points = space.dofmap.tri_points
        self.tri_edges = mesh.tri_edges


def _reduce(csr, values, fn):
    """Row-wise min/max of ``values[col]`` over a boolean CSR pattern; rows are never empty."""
    gathered = values[csr.indices]
    return fn.reduceat(gathered, csr.indptr[:-1], axis=0)


def functionals(model, u):
    """DMP test quantities: the scalar itself, or density and pressure."""
    if model.m == 4:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.stack([u[..., 0], model.pressure(u)], axis=-1)
    return u[..., :1]


def admissible(model, u, config: MoodConfig):
    if model.m == 4:
        return model.admissible(u)
    ok = np.all(np.isfinite(u), axis=-1)
    if config.pad_bounds is not None:
        lo, hi = config.pad_bounds
        with np.errstate(invalid="ignore"):
            ok &= (u[..., 0] >= lo - config.pad_tolerance) & (u[..., 0] <= hi + config.pad_tolerance)
    return ok


def _cell_range(space, xi_avg, xi_pts):
    pts = xi_pts[space.dofmap.tri_points]  # (T, npt, q)
    lo = np.minimum(xi_avg, pts.min(axis=1))
    hi = np.maximum(xi_avg, pts.max(axis=1))
    return lo, hi


class MoodLimiter:
    """Detection and first-order correction bound to a scheme."""

    def __init__(self, scheme, config: MoodConfig | None = None):
        self.scheme = scheme
        self.config = config or MoodConfig()
        self.nb = Neighbourhoods(scheme.space)
        self.totals = {}

    # ------------------------------------------------------------ detection

    def detect(self, previous: SolutionState, candidate: SolutionState) -> MoodFlags:
        sp, model, cfg = self.scheme.space, self.scheme.model, self.config
        flags = MoodFlags.empty(sp.n_triangles, sp.mesh.n_edges, sp.n_points)
        if not cfg.enabled:
            return flags
        for which, values in (("tri", candidate.averages), ("pt", candidate.point_values)):
            cause = flags.triangle_cause if which == "tri" else flags.point_cause
            finite = np.all(np.isfinite(values), axis=-1)
            if cfg.cad:
                cause[~finite] = CAD
            if cfg.pad:
                bad = ~admissible(model, values, cfg) & (cause == NONE)
                cause[bad] = PAD

        if cfg.dmp:
            self._dmp(previous, candidate, flags)
        flags.triangles = flags.triangle_cause != NONE
        flags.points = flags.point_cause != NONE
        flags.edges[np.unique(self.nb.tri_edges[flags.triangles])] = True
        return flags

    def _dmp(self, previous, candidate, flags):
        sp, model, cfg = self.scheme.space, self.scheme.model, self.config
        xa_n = functionals(model, previous.averages)
        xp_n = functionals(model, previous.point_values)
        xa_c = functionals(model, candidate.averages)
        xp_c = functionals(model, candidate.point_values)
        lo_n, hi_n = _cell_range(sp, xa_n, xp_n)
        lo_c, hi_c = _cell_range(sp, xa_c, xp_c)
        with np.errstate(invalid="ignore"):
            lo_both = np.fmin(lo_n, lo_c)
            hi_both = np.fmax(hi_n, hi_c)

        def check(patch, plateau_patch, value, cause):
            lo = _reduce(patch, lo_n, np.minimum)
            hi = _reduce(patch, hi_n, np.maximum)
            eps = np.maximum(cfg.delta0, cfg.delta1 * (hi - lo))
            with np.errstate(invalid="ignore"):
                inside = (value >= lo - eps) & (value <= hi + eps)
                spread = _reduce(plateau_patch, hi_both, np.maximum) - _reduce(plateau_patch, lo_both, np.minimum)
            plateau = np.all(spread <= cfg.plateau_tolerance, axis=-1)
            bad = ~np.all(inside, axis=-1) & ~plateau & (cause == NONE)
            cause[bad] = DMP

        check(self.nb.tri_patch, self.nb.tri_face_patch, xa_c, flags.triangle_cause)
        check(self.nb.point_patch, self.nb.point_incident, xp_c, flags.point_cause)

    # ------------------------------------------------------------ correction

    def correct(self, previous: SolutionState, candidate: SolutionState, fluxes, dt,
                a=0.0, b=1.0, base=None):
        """Recompute flagged quantities first-order.

        The candidate is ``a * previous + b * (base + dt * L(base))`` with the
        averages' part of ``L`` given by the face ``fluxes``.  Flagged faces
        take the first-order flux of ``base``; flagged points the first-order
        point update of ``base``.  For a whole SSP-RK3 cycle use ``a = 0``,
        ``b = 1``, ``base = previous`` and the SSP-weighted flux table.

        A corrected face also changes the unflagged cell on its other side, so
        detection is repeated on the corrected state until no new cell or
        point is flagged.  Returns ``(state, flags, fluxes)``.
        """
        if base is None:
            base = previous
        flags = self.detect(previous, candidate)
        out, F = candidate, fluxes
        low = None
        cache = {}
        while flags.any:
            if low is None:
                low = loworder_face_fluxes(self.scheme, base.averages, base.time)
            out, F = self._apply(previous, candidate, fluxes, low, flags, dt, a, b, base, cache)
            new = self.detect(previous, out)
            new.triangles &= ~flags.triangles
            new.points &= ~flags.points
            new.triangle_cause[~new.triangles] = NONE
            new.point_cause[~new.points] = NONE
            if not new.any:
                break
            new.edges[:] = False
            new.edges[np.unique(self.nb.tri_edges[new.triangles])] = True
            flags.merge(new)
        self._tally(flags)
        return out, flags, F

    def _apply(self, previous, candidate, fluxes, low, flags, dt, a, b, base, cache=None):
        sp = self.scheme.space
        out = candidate.copy()
        F = fluxes.copy()
        if flags.edges.any():
            F[flags.edges] = low[flags.edges]
            mesh = sp.mesh
            touched = np.unique(mesh.edge_tris[flags.edges].ravel())
            touched = touched[touched >= 0]
            rhs = averages_from_fluxes(sp, F)[touched]
            out.averages[touched] = a * previous.averages[touched] + b * (base.averages[touched] + dt * rhs)
        if flags.points.any():
            p = flags.points
            new = self.first_order_points(base, dt, p, cache)
            out.point_values[p] = a * previous.point_values[p] + b * new
        return out, F

    def first_order_points(self, base, dt, mask, cache=None):
        """First-order point values at ``base.time + dt`` on ``mask``.

        One forward-Euler step is tried first; if it leaves the invariant domain
        (the practical step may exceed the provable one) the first-order scheme
        is subcycled with 2, 4, ... steps.  ``cache`` keeps results for the
        same ``base`` and ``dt`` across repeated detection passes.
        """
        scheme, model = self.scheme, self.scheme.model
        cache = {} if cache is None else cache
        nsub = 1
        while True:
            if nsub not in cache:
                v = base
                h = dt / nsub
                for _ in range(nsub):
                    lp = loworder_point_rhs(scheme, v)
                    la = loworder_average_rhs(scheme, v) if nsub > 1 else 0.0
                    v = SolutionState(v.point_values + h * lp, v.averages + h * la, v.time + h)
                    if nsub > 1:
                        scheme.constrain(v)
                cache[nsub] = v.point_values
            vals = cache[nsub][mask]
            if nsub >= self.config.max_substeps or np.all(admissible(model, vals, self.config)):
                self.substeps = max(getattr(self, "substeps", 1), nsub)
                return vals
            nsub *= 2

    def _tally(self, flags):
        for k, v in flags.counts().items():
            self.totals[k] = self.totals.get(k, 0) + v
