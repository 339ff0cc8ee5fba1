"""First-order fallback: finite volumes for the averages, sub-element LLF residuals for the points.

Each element is split into ``N - 1`` sub-triangles ``(b_i, centroid, b_{i+1})``
whose centroid node carries the cell average.  On a sub-triangle ``T`` the
local Lax-Friedrichs residual sent to node ``s`` is

    Phi_s^T = |T| J(u_T) grad u_P1 / 3 + alpha_T (u_s - u_T),

``u_T`` being the arithmetic mean of the three nodal states.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import numerical_flux

FLUXES = ("rusanov", "roe_hartenyee")
POINT_KINDS = ("llf", "roe_rd")


@dataclass
class LowOrderConfig:
    flux: str = "rusanov"
    points: str = "llf"
    alpha_safety: float = 1.0

    def __post_init__(self):
        if self.flux == "roe":
            self.flux = "roe_hartenyee"
        if self.flux not in FLUXES:
            raise ValueError(f"unknown low-order flux {self.flux!r}")
        if self.points not in POINT_KINDS:
            raise ValueError(f"unknown low-order point scheme {self.points!r}")
        if not self.alpha_safety >= 1.0:
            raise ValueError("alpha safety factor must be >= 1")


# ------------------------------------------------------------------ averages


def loworder_face_fluxes(scheme, averages, t=0.0) -> np.ndarray:
    """``|Gamma| F(u_L, u_R, n)`` per edge from the cell averages only."""
    sp, model = scheme.space, scheme.model
    kind = scheme.loworder.flux
    mesh = sp.mesh
    out = np.empty((mesh.n_edges, model.m))
    ie = sp.interior_edges
    uL = averages[mesh.edge_tris[ie, 0]]
    uR = averages[mesh.edge_tris[ie, 1]]
    out[ie] = numerical_flux(model, kind, uL, uR, sp.edge_scaled_normals[ie], sp.edge_mid[ie],
                             stats=scheme.stats)
    for edges, f in scheme.boundary.face_fluxes_low(model, sp, averages, t, kind, scheme.stats):
        out[edges] = f
    return out


def loworder_average_flux(scheme, state, edge) -> np.ndarray:
    return loworder_face_fluxes(scheme, state.averages, state.time)[edge]


# ------------------------------------------------------------------ points


def llf_subelement_residual(model, values, normals, centroid, xy=None, safety=1.0):
    """LLF residuals of one batch of sub-triangles.

    Args:
        values: nodal states (..., 3, m).
        normals: inward scaled normals opposite each node (..., 3, 2).
        centroid: sub-triangle centroids (..., 2), where ``J(u_T)`` is evaluated.
        xy: nodal positions (..., 3, 2) for position-dependent fluxes.

    Returns residuals for all three nodes, shape (..., 3, m).
    """
    ubar = values.mean(axis=-2)
    # |T| grad(u_P1) = sum_j u_j (x) n_j / 2
    G = 0.5 * np.einsum("...jm,...jd->...md", values, normals)
    galerkin = model.jac_grad(ubar, G, centroid) / 3.0
    if xy is None:
        xy = np.broadcast_to(centroid[..., None, :], normals.shape)
    alpha = safety * llf_alpha(model, values, normals, xy, ubar, centroid)
    return galerkin[..., None, :] + alpha[..., None, None] * (values - ubar[..., None, :])


def llf_alpha(model, values, normals, xy, ubar=None, centroid=None):
    """Spectral radius bound over the nodal states and the mean state ``J(u_T)`` is built on.

    The nodal maximum alone does not dominate ``J(u_T) . n`` for non-linear
    fluxes, and positivity of the residual coefficients needs both.
    """
    speeds = model.max_speed(values[..., :, None, :], normals[..., None, :, :], xy[..., :, None, :])
    alpha = speeds.max(axis=(-1, -2))
    if ubar is None:
        ubar = values.mean(axis=-2)
        centroid = xy.mean(axis=-2)
    mean = model.max_speed(ubar[..., None, :], normals, np.broadcast_to(centroid[..., None, :], normals.shape))
    return np.maximum(alpha, mean.max(axis=-1))


def _roe_rd(model, values, dual_normals, dual_mid, stats):
    """Node 0 and node 2 residuals of the FV-in-RD form across median-dual faces."""
    out = []
    for i in (0, 2):
        acc = 0.0
        for j in range(3):
            if j == i:
                continue
            n = dual_normals[(i, j)]
            x = dual_mid[(i, j)]
            ui, uj = values[..., i, :], values[..., j, :]
            acc = acc + numerical_flux(model, "roe_hartenyee", ui, uj, n, x, stats=stats) - model.flux_n(ui, n, x)
        out.append(acc)
    return np.stack(out, axis=-2)


def _element_residuals(scheme, local, normals, sub_xy, dual_normals, dual_mid):
    """(k, N-1, 2, m) residuals sent by every sub-triangle to its two boundary nodes."""
    sp, model = scheme.space, scheme.model
    ln = sp.partition.local_nodes
    values = local[:, ln]  # (k, npt, 3, m)
    if scheme.loworder.points == "llf":
        res = llf_subelement_residual(model, values, normals, sub_xy.mean(axis=-2), sub_xy,
                                      scheme.loworder.alpha_safety)
        return res[..., [0, 2], :]
    return _roe_rd(model, values, dual_normals, dual_mid, scheme.stats)


def _reflect(v, R):
    """Apply per-element 2x2 matrices R (k, 2, 2) to vectors (k, ..., 2)."""
    shape = v.shape
    return np.matmul(v.reshape(shape[0], -1, 2), R).reshape(shape)


def loworder_point_residuals(scheme, state, local=None) -> np.ndarray:
    """``sum_E sum_{T ∋ s} Phi_s^T`` per point DoF, wall mirror elements included."""
    sp = scheme.space
    m = scheme.model.m
    if local is None:
        local = sp.local_values(state)
    res = _element_residuals(scheme, local, sp.partition.inward_normals, sp.sub_xy,
                             sp.sub_dual_normals, sp.sub_dual_mid)
    total = sp.sub_scatter @ res.reshape(-1, m)

    bc = scheme.boundary
    if bc.wall_edges is not None:
        vals, _, _, _, R = bc.virtual_elements(sp, local, scheme.model)
        t = bc.wall_owner
        nu, anchor = bc.wall_normals, bc.wall_anchor
        xy = sp.sub_xy[t]
        d = np.sum((xy - anchor[:, None, None, :]) * nu[:, None, None, :], axis=-1)
        xy = xy - 2.0 * d[..., None] * nu[:, None, None, :]
        normals = _reflect(sp.partition.inward_normals[t], R)
        dn = {k: _reflect(v[t], R) for k, v in sp.sub_dual_normals.items()}
        dm = {}
        for k, v in sp.sub_dual_mid.items():
            dd = np.sum((v[t] - anchor[:, None, :]) * nu[:, None, :], axis=-1)
            dm[k] = v[t] - 2.0 * dd[..., None] * nu[:, None, :]
        vres = _element_residuals(scheme, vals, normals, xy, dn, dm)  # (W, npt, 2, m)
        ln = sp.partition.local_nodes[:, [0, 2]]  # (npt, 2)
        on_wall = (ln[None, :, :, None] == bc.wall_nodes[:, None, None, :]).any(axis=-1)
        dofs = sp.dofmap.tri_points[t[:, None, None], ln[None]]
        np.add.at(total, dofs[on_wall], vres[on_wall])
    return total


def loworder_point_rhs(scheme, state, local=None) -> np.ndarray:
    sp = scheme.space
    total = loworder_point_residuals(scheme, state, local)
    pen = scheme.boundary.farfield_penalty(scheme.model, sp, state.point_values)
    rhs = -(total + pen) / sp.dual_measure[:, None]
    return scheme.boundary.finalize_point_rhs(rhs)


def loworder_average_rhs(scheme, state):
    from .highorder import averages_from_fluxes

    return averages_from_fluxes(scheme.space, loworder_face_fluxes(scheme, state.averages, state.time))


def provable_dt(scheme, state) -> float:
    """Largest step with ``3 dt alpha_T / |T| <= 1`` on every sub-triangle and
    ``dt sum_Gamma alpha_Gamma |Gamma| <= |E|`` for the finite-volume averages."""
    sp = scheme.space
    model = scheme.model
    local = sp.local_values(state)
    values = local[:, sp.partition.local_nodes]
    alpha = llf_alpha(model, values, sp.partition.inward_normals, sp.sub_xy)
    alpha = scheme.loworder.alpha_safety * alpha
    with np.errstate(divide="ignore"):
        dt = sp.partition.areas / (3.0 * alpha)

    mesh = sp.mesh
    et = mesh.edge_tris
    right = np.where(et[:, 1] >= 0, et[:, 1], et[:, 0])
    speed = model.fan_speed(state.averages[et[:, 0]], state.averages[right], sp.edge_scaled_normals, sp.edge_mid)
    total = np.zeros(mesh.n_triangles)
    np.add.at(total, et[:, 0], speed)
    inner = et[:, 1] >= 0
    np.add.at(total, et[inner, 1], speed[inner])
    with np.errstate(divide="ignore"):
        dt_fv = mesh.areas / total
    return float(min(np.min(dt), np.min(dt_fv)))
