"""Boundary conditions for the average fluxes and the point residuals.

Four kinds are supported per boundary tag:

``wall``
    slip wall.  Faces use a numerical flux against the mirrored trace; point
    DoFs receive the residual of a virtual element reflected across the edge.
``farfield``
    weak imposition of a fixed state: upwind flux against ``u_inf`` on faces,
    characteristic penalty on point DoFs.
``neumann``
    faces use the physical flux of the trace, point DoFs are frozen.
``exact_dirichlet``
    faces use an upwind flux against a known solution; after every stage the
    incoming characteristic components of the point DoFs are replaced by that
    solution, outgoing components keep their interior update.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import basis
from .models import FluxModel, eigen_split, numerical_flux

KINDS = ("wall", "farfield", "neumann", "exact_dirichlet")


TANGENT_TOL = 1e-10


class BoundaryError(ValueError):
    pass


@dataclass
class BoundaryCondition:
    kind: str
    state: np.ndarray | None = None
    exact: Callable | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BoundaryError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "farfield":
            if self.state is None:
                raise BoundaryError("farfield needs a state")
            self.state = np.atleast_1d(np.asarray(self.state, dtype=float))
        if self.kind == "exact_dirichlet" and self.exact is None:
            raise BoundaryError("exact_dirichlet needs an exact solution u(x, t)")


def wall():
    return BoundaryCondition("wall")


def farfield(state):
    return BoundaryCondition("farfield", state=state)


def neumann():
    return BoundaryCondition("neumann")


def exact_dirichlet(exact):
    return BoundaryCondition("exact_dirichlet", exact=exact)


@dataclass
class BoundarySpec:
    """Tag -> condition map plus the two-point flux used on weakly imposed faces."""

    conditions: dict[str, BoundaryCondition]
    flux: str = "roe"
    default: BoundaryCondition | None = None

    @classmethod
    def uniform(cls, condition, flux="roe"):
        return cls({}, flux=flux, default=condition)

    def condition_for(self, tag):
        if tag in self.conditions:
            return self.conditions[tag]
        if self.default is not None:
            return self.default
        raise BoundaryError(f"boundary tag {tag!r} has no condition")

    def validate(self, mesh, model: FluxModel):
        for tag in mesh.tags:
            cond = self.condition_for(tag)
            if cond.kind == "farfield":
                if cond.state.shape != (model.m,):
                    raise BoundaryError(f"farfield state for {tag!r} has {cond.state.size} components")
                if not np.all(model.admissible(cond.state)):
                    raise BoundaryError(f"farfield state for {tag!r} is not admissible")


def mirror_state(u, n):
    """Reflect the velocity of an Euler state across the line with normal ``n``; identity for scalars."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 4:
        return u.copy()
    n = np.asarray(n, dtype=float)
    nn = n[..., 0] ** 2 + n[..., 1] ** 2
    mn = (u[..., 1] * n[..., 0] + u[..., 2] * n[..., 1]) / nn
    out = u.copy()
    out[..., 1] = u[..., 1] - 2.0 * mn * n[..., 0]
    out[..., 2] = u[..., 2] - 2.0 * mn * n[..., 1]
    return out


def boundary_face_flux(model, cond: BoundaryCondition, u, n, x, t, flux="roe", stats=None):
    """Normal flux on a boundary face for trace values ``u`` (..., m) and outward normals ``n``."""
    if cond.kind == "neumann":
        return model.flux_n(u, n, x)
    if cond.kind == "wall":
        ghost = mirror_state(u, n)
    elif cond.kind == "farfield":
        ghost = np.broadcast_to(cond.state, u.shape)
    else:
        ghost = np.asarray(cond.exact(x, t), dtype=float).reshape(u.shape)
    return numerical_flux(model, flux, u, ghost, n, x, stats=stats)


def farfield_shares(order):
    """Fraction of a boundary edge's length attributed to each of its ``order + 1`` nodes."""
    return np.array([0.25, 0.5, 0.25]) if order == 2 else np.array([1, 2, 2, 1]) / 6.0


def reflection(nu):
    """Householder matrices ``I - 2 nu nu^T`` for unit normals (..., 2)."""
    return np.eye(2) - 2.0 * nu[..., :, None] * nu[..., None, :]


@dataclass(eq=False)
class _Group:
    cond: BoundaryCondition
    edges: np.ndarray
    owner: np.ndarray
    local_edge: np.ndarray


@dataclass(eq=False)
class BoundaryOperator:
    """A :class:`BoundarySpec` compiled against a space: index tables per boundary kind."""

    spec: BoundarySpec
    groups: list = field(default_factory=list)
    wall_edges: np.ndarray = None
    wall_owner: np.ndarray = None
    wall_nodes: np.ndarray = None  # (W, order+1) local node indices on the wall edge
    wall_normals: np.ndarray = None  # unit outward
    wall_anchor: np.ndarray = None  # a point on each wall edge
    frozen_points: np.ndarray = None
    dirichlet_points: np.ndarray = None
    dirichlet_cond: list = None  # [(condition, point ids, summed outward normals)]
    model: FluxModel = None
    farfield_points: np.ndarray = None  # (F, order+1)
    farfield_normals: np.ndarray = None  # (F, order+1, 2) share-scaled outward normals
    farfield_state: np.ndarray = None  # (F, m)

    @classmethod
    def compile(cls, space, spec: BoundarySpec, model: FluxModel):
        mesh = space.mesh
        spec.validate(mesh, model)
        op = cls(spec, model=model)
        bedges = mesh.boundary_edges
        owner = mesh.edge_tris[bedges, 0]
        # local edge index of each boundary edge in its owner
        le = np.argmax(mesh.tri_edges[owner] == bedges[:, None], axis=1)
        kinds = {}
        for k, e in enumerate(bedges):
            tag = mesh.boundary_tags[int(e)]
            cond = spec.condition_for(tag)
            kinds.setdefault(id(cond), (cond, []))[1].append(k)
        for cond, idx in kinds.values():
            idx = np.array(idx, dtype=int)
            op.groups.append(_Group(cond, bedges[idx], owner[idx], le[idx]))

        order = space.order
        enodes = np.array([basis.edge_local_nodes(order, j) for j in range(3)])
        walls = [g for g in op.groups if g.cond.kind == "wall"]
        cat = (lambda xs, f: np.concatenate([f(g) for g in xs]) if xs else None)
        if walls:
            op.wall_edges = cat(walls, lambda g: g.edges)
            op.wall_owner = cat(walls, lambda g: g.owner)
            op.wall_nodes = enodes[cat(walls, lambda g: g.local_edge)]
            op.wall_normals = mesh.edge_normals[op.wall_edges]
            op.wall_anchor = mesh.vertices[mesh.edges[op.wall_edges, 0]]

        ep = space.dofmap.edge_points
        frozen = [g for g in op.groups if g.cond.kind == "neumann"]
        op.frozen_points = np.unique(ep[cat(frozen, lambda g: g.edges)]) if frozen else np.zeros(0, int)
        dir_groups = [g for g in op.groups if g.cond.kind == "exact_dirichlet"]
        op.dirichlet_cond = []
        pts = []
        share = farfield_shares(order)
        for g in dir_groups:
            p, inv = np.unique(ep[g.edges], return_inverse=True)
            nrm = (share[None, :, None] * mesh.edge_lengths[g.edges, None, None]
                   * mesh.edge_normals[g.edges, None, :])
            acc = np.zeros((len(p), 2))
            np.add.at(acc, inv.reshape(-1), nrm.reshape(-1, 2))
            op.dirichlet_cond.append((g.cond, p, acc))
            pts.append(p)
        op.dirichlet_points = np.unique(np.concatenate(pts)) if pts else np.zeros(0, int)

        far = [g for g in op.groups if g.cond.kind == "farfield"]
        if far:
            e = cat(far, lambda g: g.edges)
            op.farfield_points = ep[e]
            share = farfield_shares(order)
            op.farfield_normals = (share[None, :, None] * mesh.edge_lengths[e, None, None]
                                   * mesh.edge_normals[e, None, :])
            op.farfield_state = np.concatenate([np.repeat(g.cond.state[None], len(g.edges), 0) for g in far])
        return op

    # ---------------------------------------------------------------- faces

    def face_fluxes(self, model, space, traces, t, stats=None):
        """Integrated high-order normal flux for every boundary edge, written into a dict edge -> flux."""
        out = []
        for g in self.groups:
            u = traces[g.edges]
            n = space.edge_qnormals[g.edges]
            x = space.edge_qxy[g.edges]
            f = boundary_face_flux(model, g.cond, u, n, x, t, self.spec.flux, stats)
            out.append((g.edges, f.sum(axis=1)))
        return out

    def face_fluxes_low(self, model, space, averages, t, kind, stats=None):
        """First-order boundary fluxes from the owner averages, one midpoint evaluation per edge."""
        out = []
        for g in self.groups:
            u = averages[g.owner]
            n = space.edge_scaled_normals[g.edges]
            x = space.edge_mid[g.edges]
            flux = kind if g.cond.kind == "wall" else self.spec.flux
            if g.cond.kind == "farfield":
                flux = "roe"
            out.append((g.edges, boundary_face_flux(model, g.cond, u, n, x, t, flux, stats)))
        return out

    # ---------------------------------------------------------------- points

    def virtual_elements(self, space, local, model):
        """Mirror images of wall-adjacent elements.

        Returns ``(values, grad_lambda, node_normals, node_xy, R)`` where values
        keep the real trace on the wall edge and mirror everything else.
        """
        t = self.wall_owner
        nu = self.wall_normals
        R = reflection(nu)
        vals = local[t].copy()
        mirrored = mirror_state(vals, nu[:, None, :])
        keep = np.zeros(vals.shape[:2], dtype=bool)
        np.put_along_axis(keep, self.wall_nodes, True, axis=1)
        vals = np.where(keep[..., None], vals, mirrored)
        gl = np.matmul(space.grad_lambda[t], R)
        normals = np.matmul(space.node_normal_table.normals[t], R)
        xy = space.node_xy_local[t]
        d = np.sum((xy - self.wall_anchor[:, None, :]) * nu[:, None, :], axis=-1)
        xy = xy - 2.0 * d[..., None] * nu[:, None, :]
        return vals, gl, normals, xy, R

    def farfield_penalty(self, model, space, point_values):
        """``sum_Gamma K^-(u_inf - u_sigma)`` per point DoF (to be divided by the dual measure)."""
        out = np.zeros_like(point_values)
        if self.farfield_points is None:
            return out
        ids = self.farfield_points
        u = point_values[ids]
        uinf = np.broadcast_to(self.farfield_state[:, None, :], u.shape)
        x = space.point_xy[ids]
        km = eigen_split(model, u, self.farfield_normals, x).minus
        contrib = np.matmul(km, (uinf - u)[..., None])[..., 0]
        np.add.at(out, ids.reshape(-1), contrib.reshape(-1, u.shape[-1]))
        return out

    def finalize_point_rhs(self, rhs):
        """Freeze Neumann point DoFs."""
        if len(self.frozen_points):
            rhs[self.frozen_points] = 0.0
        return rhs

    def constrain(self, space, state):
        """Impose the exact solution at ``state.time`` on incoming characteristics of Dirichlet DoFs.

        The characteristic split uses the summed outward normal of the
        node's boundary edges.  Speeds within rounding of zero count as
        incoming: at corners where the flow is tangent to both edges the
        interior update would rely on an extrapolated gradient.
        """
        model = self.model
        for cond, pts, nrm in self.dirichlet_cond:
            x = space.point_xy[pts]
            g = np.asarray(cond.exact(x, state.time), dtype=float).reshape(len(pts), -1)
            u = state.point_values[pts]
            tol = TANGENT_TOL * model.wave_scale(u, nrm, x)
            if model.m == 1:
                incoming = model.speed_n(u, nrm, x) <= tol
                state.point_values[pts] = np.where(incoming[:, None], g, u)
                continue
            with np.errstate(invalid="ignore"):
                lam, R, L = model.eigensystem(u, nrm, x)
            ok = np.all(np.isfinite(lam), axis=-1)
            sel = (lam <= tol[:, None]).astype(float)
            du = np.matmul(R * sel[:, None, :], np.matmul(L, (g - u)[..., None]))[..., 0]
            state.point_values[pts] = np.where(ok[:, None], u + du, g)
        return state
