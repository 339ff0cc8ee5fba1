"""High-order Active Flux spatial operator.

Averages change by the integrated normal flux of the continuous
reconstruction through the element boundary.  Point values are updated by
residual distribution: every element sharing a point DoF ``s`` contributes

    Phi_s^E = N_s (K_s^E)^+ J(u_s) grad u|_E(s),   N_s^-1 = sum_E (K_s^E)^+,

with ``K_s^E = J(u_s) . n_s^E`` built from the element's scaled node normal.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .boundary import BoundaryOperator, BoundarySpec
from .loworder import LowOrderConfig
from .models import FluxModel, FluxStats
from .space import SolutionState, Space

logger = logging.getLogger(__name__)

# Near-zero eigenvalues get a tiny positive weight so that flow exactly tangent
# to an edge splits evenly between the two sides instead of producing 0/0.
REG_EPS = 1e-8
REG_WIDTH = 1e-6
PINV_RCOND = 1e-12


@dataclass
class SchemeWorkspace:
    """Time derivatives of one evaluation plus the face fluxes used for the averages."""

    point_rhs: np.ndarray
    average_rhs: np.ndarray
    face_fluxes: np.ndarray

    def __iter__(self):
        return iter((self.point_rhs, self.average_rhs, self.face_fluxes))


@dataclass
class Diagnostics:
    degenerate_nodes: int = 0
    evaluations: int = 0


@dataclass(eq=False)
class Scheme:
    """Everything a stage evaluation needs: space, model, boundary operator and options."""

    space: Space
    model: FluxModel
    boundary: BoundaryOperator
    loworder: LowOrderConfig = field(default_factory=LowOrderConfig)
    variant: str = "positive"
    stats: FluxStats = field(default_factory=FluxStats)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    _linear: object = field(default=None, repr=False)

    @classmethod
    def build(cls, space: Space, model: FluxModel, bc: BoundarySpec, loworder=None, variant="positive"):
        if variant not in ("positive", "sign"):
            raise ValueError(f"unknown distribution variant {variant!r}")
        op = BoundaryOperator.compile(space, bc, model)
        return cls(space, model, op, loworder or LowOrderConfig(), variant)

    def constrain(self, state):
        return self.boundary.constrain(self.space, state)

    def __call__(self, state):
        return spatial_operator_high(self, state)

    @property
    def linear(self):
        """Assembled operator for linear scalar models without walls, else ``None``."""
        if self._linear is None:
            ok = getattr(self.model, "linear", False) and self.boundary.wall_edges is None
            self._linear = LinearOperator.assemble(self) if ok else False
        return self._linear or None


@dataclass
class LinearOperator:
    """For a linear flux, ``K^+``, ``N`` and the node gradients do not depend on the
    state: the point residuals and the interior face fluxes are fixed sparse maps."""

    points: sparse.csr_matrix  # (P, P + T) on [point values; averages]
    faces: sparse.csr_matrix  # (interior edges, P)
    degenerate: int

    @classmethod
    def assemble(cls, scheme):
        sp, model = scheme.space, scheme.model
        T, P, npt, nb = sp.n_triangles, sp.n_points, sp.n_local, sp.n_basis
        grads = sp.node_gradients(np.broadcast_to(np.eye(nb), (T, nb, nb)))  # (T, npt, nb, 2)
        a = model.flux_derivative(None, sp.pair_xy)
        a = np.stack([a[0][:, 0], a[1][:, 0]], axis=-1)
        ag = np.einsum("pjd,pd->pj", grads.reshape(-1, nb, 2), a)
        dummy = np.zeros((len(sp.pair_dof), 1))
        K = distribution_matrices(model, dummy, sp.pair_normals, sp.pair_xy, scheme.variant)
        S = (sp.point_scatter @ K[:, 0, 0])[:, None, None]
        scale = sp.point_scatter @ model.wave_scale(dummy, sp.pair_normals, sp.pair_xy)
        N, degenerate = _invert(S, model, scale)
        w = N[sp.pair_dof, 0, 0] * K[:, 0, 0]
        cols = np.concatenate([sp.dofmap.tri_points, P + np.arange(T)[:, None]], axis=1)
        cols = np.repeat(cols, npt, axis=0)
        rows = np.repeat(sp.pair_dof, nb)
        points = sparse.csr_matrix(((w[:, None] * ag).ravel(), (rows, cols.ravel())), shape=(P, P + T))

        ie = sp.interior_edges
        an = model.speed_n(None, sp.interior_qnormals, sp.interior_qxy)  # (Ei, q)
        coef = an @ sp.edge_trace  # (Ei, order + 1)
        ep = sp.dofmap.edge_points[ie]
        faces = sparse.csr_matrix((coef.ravel(), (np.repeat(np.arange(len(ie)), ep.shape[1]), ep.ravel())),
                                  shape=(len(ie), P))
        return cls(points, faces, degenerate)


# ------------------------------------------------------------------ averages


def face_fluxes(scheme: Scheme, state: SolutionState) -> np.ndarray:
    """Integrated normal flux ``int f(u_h) . n`` per edge, normal oriented left -> right."""
    sp, model = scheme.space, scheme.model
    out = np.empty((sp.mesh.n_edges, model.m))
    ie = sp.interior_edges
    lin = scheme.linear
    if lin is not None:
        out[ie] = lin.faces @ state.point_values
        be = sp.mesh.boundary_edges
        traces = np.zeros((sp.mesh.n_edges, len(sp.edge_gauss_w), model.m))
        traces[be] = sp.edge_values(state, be)
    else:
        traces = sp.edge_values(state)
        out[ie] = model.flux_n(traces[ie], sp.interior_qnormals, sp.interior_qxy).sum(axis=1)
    for edges, f in scheme.boundary.face_fluxes(model, sp, traces, state.time, scheme.stats):
        out[edges] = f
    return out


def averages_from_fluxes(space: Space, fluxes: np.ndarray) -> np.ndarray:
    """``-(1/|E|) sum_edges (+-) F_e``; each edge flux enters its two triangles with opposite signs."""
    return -(space.incidence @ fluxes) / space.mesh.areas[:, None]


def average_rhs(scheme: Scheme, state: SolutionState) -> np.ndarray:
    return averages_from_fluxes(scheme.space, face_fluxes(scheme, state))


# ------------------------------------------------------------------ point values


def distribution_matrices(model, u, n, x, variant="positive"):
    """Regularised ``K^+`` (or the sign-based weight) per pair, shape (k, m, m)."""
    scale = model.wave_scale(u, n, x)
    eps = REG_EPS * scale
    width = REG_WIDTH * scale
    if model.m == 1:
        lam = model.speed_n(u, n, x)[..., None]
        R = L = None
    else:
        lam, R, L = model.eigensystem(u, n, x)
    w = width[..., None]
    with np.errstate(invalid="ignore", divide="ignore"):
        ramp = np.where(w > 0, np.clip(1.0 - np.abs(lam) / np.where(w > 0, w, 1.0), 0.0, 1.0), 0.0)
        if variant == "positive":
            d = np.maximum(lam, 0.0) + eps[..., None] * ramp
        else:
            d = np.where(w > 0, np.clip(0.5 + 0.5 * lam / np.where(w > 0, w, 1.0), 0.0, 1.0),
                         (lam > 0).astype(float))
    if R is None:
        return d[..., None]
    return np.matmul(R * d[..., None, :], L)


def _invert(S, model, scale):
    """Batched (pseudo-)inverse of the accumulated ``sum K^+``; returns inverse and degenerate count."""
    if model.m == 1:
        s = S[:, 0, 0]
        ok = s > 1e-14 * np.maximum(scale, 1e-300)
        inv = np.where(ok, 1.0 / np.where(ok, s, 1.0), 0.0)
        return inv[:, None, None], int(np.count_nonzero(~ok & (scale > 0)))
    finite = np.all(np.isfinite(S), axis=(1, 2))
    Sf = np.where(finite[:, None, None], S, 0.0)
    # LU inverse where well conditioned, SVD pseudo-inverse elsewhere
    inv = np.zeros_like(Sf)
    size = np.abs(Sf).max(axis=(1, 2))
    det = np.abs(np.linalg.det(Sf))
    good = finite & (size > 0) & (det > (PINV_RCOND * size) ** S.shape[1])
    if good.any():
        inv[good] = np.linalg.inv(Sf[good])
        cond = np.abs(inv[good]).max(axis=(1, 2)) * size[good]
        good[np.flatnonzero(good)[~(cond < 1.0 / PINV_RCOND)]] = False
    rest = np.flatnonzero(~good)
    degenerate = 0
    if rest.size:
        U, sv, Vt = np.linalg.svd(Sf[rest])
        keep = sv > PINV_RCOND * sv[:, :1]
        sinv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
        inv[rest] = np.matmul(Vt.transpose(0, 2, 1) * sinv[:, None, :], U.transpose(0, 2, 1))
        degenerate = int(np.count_nonzero(~np.all(keep, axis=1)))
    inv[~finite] = np.nan
    return inv, degenerate


def _pair_terms(model, u, grads, normals, x, variant):
    r = model.jac_grad(u, grads, x)
    K = distribution_matrices(model, u, normals, x, variant)
    return K, np.matmul(K, r[..., None])[..., 0]


def point_residual_totals(scheme: Scheme, state: SolutionState, local=None):
    """``sum_E Phi_s^E`` for every point DoF (wall DoFs include their mirrored elements)."""
    sp, model = scheme.space, scheme.model
    m = model.m
    lin = scheme.linear
    if lin is not None:
        scheme.diagnostics.degenerate_nodes = lin.degenerate
        return lin.points @ np.concatenate([state.point_values, state.averages])
    if local is None:
        local = sp.local_values(state)
    u_pair = state.point_values[sp.pair_dof]
    G = sp.node_gradients(local).reshape(-1, m, 2)
    K, Kr = _pair_terms(model, u_pair, G, sp.pair_normals, sp.pair_xy, scheme.variant)
    S = (sp.point_scatter @ K.reshape(len(K), m * m)).reshape(-1, m, m)
    Sr = sp.point_scatter @ Kr
    scale = sp.point_scatter @ model.wave_scale(u_pair, sp.pair_normals, sp.pair_xy)

    bc = scheme.boundary
    if bc.wall_edges is not None:
        vals, gl, normals, xy, _ = bc.virtual_elements(sp, local, model)
        Gv = sp.node_gradients(vals, gl)
        idx = bc.wall_nodes
        Gv = np.take_along_axis(Gv, idx[:, :, None, None], axis=1).reshape(-1, m, 2)
        nv = np.take_along_axis(normals, idx[:, :, None], axis=1).reshape(-1, 2)
        xv = np.take_along_axis(xy, idx[:, :, None], axis=1).reshape(-1, 2)
        dofs = sp.dofmap.tri_points[bc.wall_owner[:, None], idx].reshape(-1)
        uv = state.point_values[dofs]
        Kv, Krv = _pair_terms(model, uv, Gv, nv, xv, scheme.variant)
        np.add.at(S, dofs, Kv)
        np.add.at(Sr, dofs, Krv)
        np.add.at(scale, dofs, model.wave_scale(uv, nv, xv))

    N, degenerate = _invert(S, model, scale)
    scheme.diagnostics.degenerate_nodes = degenerate
    return np.matmul(N, Sr[..., None])[..., 0]


def node_point_residual(scheme: Scheme, state: SolutionState, sigma: int) -> np.ndarray:
    """``sum_{E ∋ sigma} Phi_sigma^E`` for a single point DoF."""
    return point_residual_totals(scheme, state)[sigma]


def point_rhs_high(scheme: Scheme, state: SolutionState, local=None) -> np.ndarray:
    sp = scheme.space
    rhs = -point_residual_totals(scheme, state, local)
    pen = scheme.boundary.farfield_penalty(scheme.model, sp, state.point_values)
    rhs -= pen / sp.dual_measure[:, None]
    return scheme.boundary.finalize_point_rhs(rhs)


def spatial_operator_high(scheme: Scheme, state: SolutionState) -> SchemeWorkspace:
    scheme.diagnostics.evaluations += 1
    F = face_fluxes(scheme, state)
    return SchemeWorkspace(point_rhs_high(scheme, state), averages_from_fluxes(scheme.space, F), F)
