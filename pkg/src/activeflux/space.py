"""The Active Flux approximation space on a mesh: DoF layout plus precomputed tables.

Everything here depends only on the mesh and the polynomial order, so a
:class:`Space` is built once and shared read-only by every stage evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import basis
from .mesh import Mesh, build_dof_map, build_geometry_tables


@dataclass
class SolutionState:
    """Point values ``(n_points, m)``, cell averages ``(n_triangles, m)`` and the time."""

    point_values: np.ndarray
    averages: np.ndarray
    time: float = 0.0

    def copy(self):
        return SolutionState(self.point_values.copy(), self.averages.copy(), self.time)

    def axpy(self, a, dpoints, daverages, dt=0.0):
        return SolutionState(self.point_values + a * dpoints, self.averages + a * daverages, self.time + dt)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.point_values)) and np.all(np.isfinite(self.averages)))


def _scatter_matrix(rows, n_rows):
    cols = np.arange(len(rows))
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_rows, len(rows)))


class Space:
    """Mesh + order + every index/geometry table the schemes gather from."""

    def __init__(self, mesh: Mesh, order: int):
        if order not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {order}")
        self.mesh = mesh
        self.order = order
        self.dofmap = build_dof_map(mesh, order)
        self.node_normal_table, self.partition = build_geometry_tables(mesh, order, self.dofmap)
        self.n_basis = basis.n_basis(order)
        self.n_local = self.n_basis - 1
        T = mesh.n_triangles
        self.n_points = self.dofmap.n_points
        self.n_triangles = T

        self.grad_lambda = mesh.barycentric_gradients()
        self._grad_lambda_T = np.ascontiguousarray(self.grad_lambda.transpose(1, 2, 0))  # (3, 2, T)
        nodes = basis.point_nodes(order)
        # barycentric partials of every basis function at every point node: (npt*3, N)
        dbary = basis.eval_basis_dbary(order, nodes)  # (npt, N, 3)
        self._node_dbary = np.ascontiguousarray(dbary.transpose(0, 2, 1).reshape(-1, self.n_basis))

        p = mesh.vertices[mesh.triangles]
        self.node_xy_local = np.einsum("nk,tkd->tnd", nodes, p)  # (T, npt, 2)
        self.centroids = p.mean(axis=1)

        # (element, local node) pairs
        self.pair_dof = self.dofmap.tri_points.reshape(-1)
        self.pair_xy = self.node_xy_local.reshape(-1, 2)
        self.pair_normals = self.node_normal_table.normals.reshape(-1, 2)
        self.point_scatter = _scatter_matrix(self.pair_dof, self.n_points)
        self.point_valence = np.bincount(self.pair_dof, minlength=self.n_points)

        # edge quadrature: 3 Gauss points, traces from the order+1 edge nodes
        s, w = basis.gauss_edge(3)
        self.edge_gauss_s = s
        self.edge_gauss_w = w
        self.edge_trace = basis.edge_lagrange(order, s)  # (3, order+1)
        a = mesh.vertices[mesh.edges[:, 0]]
        b = mesh.vertices[mesh.edges[:, 1]]
        self.edge_qxy = (1 - s)[None, :, None] * a[:, None, :] + s[None, :, None] * b[:, None, :]
        # scaled normals per quadrature point: weight * |edge| * unit normal
        self.edge_qnormals = (w[None, :, None] * mesh.edge_lengths[:, None, None]
                              * mesh.edge_normals[:, None, :])
        self.edge_mid = 0.5 * (a + b)
        self.edge_scaled_normals = mesh.edge_lengths[:, None] * mesh.edge_normals
        left, right = mesh.edge_tris[:, 0], mesh.edge_tris[:, 1]
        interior = right >= 0
        rows = np.concatenate([left, right[interior]])
        cols = np.concatenate([np.arange(mesh.n_edges), np.flatnonzero(interior)])
        vals = np.concatenate([np.ones(mesh.n_edges), -np.ones(int(interior.sum()))])
        self.incidence = sparse.csr_matrix((vals, (rows, cols)), shape=(T, mesh.n_edges))
        self.interior_edges = np.flatnonzero(interior)

        # interior quadrature for averages
        qw, qlam = basis.rule_for_order(order)
        self.quad_weights = qw
        self.quad_bary = qlam
        self.quad_xy = np.einsum("qk,tkd->tqd", qlam, p)
        self.quad_basis = basis.eval_basis(order, qlam)  # (nq, N)

        # sub-element fan
        part = self.partition
        node_xy_full = np.concatenate([self.node_xy_local, self.centroids[:, None, :]], axis=1)
        self.sub_xy = node_xy_full[:, part.local_nodes]  # (T, npt, 3, 2)
        self.sub_centroids = self.sub_xy.mean(axis=2)
        # scatter of sub-triangle node-0 and node-2 residuals to point DoFs
        ln = part.local_nodes
        self.sub_dofs = self.dofmap.tri_points[:, np.stack([ln[:, 0], ln[:, 2]], axis=1)]  # (T, npt, 2)
        self.sub_scatter = _scatter_matrix(self.sub_dofs.reshape(-1), self.n_points)
        self.dual_measure = part.dual_measure
        # median-dual faces inside each sub-triangle, normal oriented from node i to node j
        self.sub_dual_normals = {}
        for i, j in ((0, 1), (0, 2), (1, 2)):
            xi, xj = self.sub_xy[:, :, i], self.sub_xy[:, :, j]
            xk = self.sub_xy[:, :, 3 - i - j]
            mid = 0.5 * (xi + xj)
            g = (xi + xj + xk) / 3.0
            d = g - mid
            nrm = np.stack([d[..., 1], -d[..., 0]], axis=-1)
            flip = np.sign(np.sum(nrm * (xj - xi), axis=-1))
            self.sub_dual_normals[(i, j)] = nrm * flip[..., None]
            self.sub_dual_normals[(j, i)] = -nrm * flip[..., None]
        self.sub_dual_mid = {}
        for i, j in ((0, 1), (0, 2), (1, 2)):
            xi, xj = self.sub_xy[:, :, i], self.sub_xy[:, :, j]
            xk = self.sub_xy[:, :, 3 - i - j]
            mid = 0.5 * (0.5 * (xi + xj) + (xi + xj + xk) / 3.0)
            self.sub_dual_mid[(i, j)] = self.sub_dual_mid[(j, i)] = mid

        self.perimeters = mesh.perimeters()
        self.length_scale = 2.0 * mesh.areas / self.perimeters

        ie = self.interior_edges
        self.interior_qxy = self.edge_qxy[ie]
        self.interior_qnormals = self.edge_qnormals[ie]
        # position tables are frozen so models may cache field evaluations on them
        for name in ("pair_xy", "pair_normals", "edge_qxy", "edge_qnormals", "interior_qxy",
                     "interior_qnormals", "quad_xy", "sub_xy", "sub_centroids", "centroids"):
            table = np.array(getattr(self, name))
            table.setflags(write=False)
            setattr(self, name, table)

    # ------------------------------------------------------------------ helpers

    @property
    def point_xy(self):
        return self.dofmap.point_xy

    def local_values(self, state: SolutionState) -> np.ndarray:
        """(T, N, m): point values in local order followed by the average."""
        pts = state.point_values[self.dofmap.tri_points]
        return np.concatenate([pts, state.averages[:, None, :]], axis=1)

    def node_gradients(self, local: np.ndarray, grad_lambda=None) -> np.ndarray:
        """Element-wise gradients at every local point node, shape (T, npt, m, 2)."""
        if grad_lambda is None:
            glT = self._grad_lambda_T
        else:
            glT = np.ascontiguousarray(grad_lambda.transpose(1, 2, 0))
        k, n, m = local.shape
        # one GEMM over all elements (element index innermost), then the chain rule
        d = self._node_dbary @ np.ascontiguousarray(local.transpose(1, 2, 0)).reshape(n, m * k)
        d = d.reshape(self.n_local, 3, m, 1, k)
        g = d[:, 0] * glT[0] + d[:, 1] * glT[1] + d[:, 2] * glT[2]  # (npt, m, 2, k)
        return g.transpose(3, 0, 1, 2)

    def edge_values(self, state: SolutionState, edges=None) -> np.ndarray:
        """Trace values at the edge Gauss points, shape (E, 3, m) (or only ``edges``)."""
        ep = self.dofmap.edge_points if edges is None else self.dofmap.edge_points[edges]
        ev = state.point_values[ep]  # (E, order+1, m)
        return np.einsum("qj,ejm->eqm", self.edge_trace, ev)

    def interpolate(self, func, time=0.0) -> SolutionState:
        """Sample ``func`` at point DoFs and integrate it over each element for the averages."""
        pts = np.asarray(func(self.point_xy), dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        q = np.asarray(func(self.quad_xy.reshape(-1, 2)), dtype=float)
        q = q.reshape(self.n_triangles, len(self.quad_weights), -1)
        avg = np.einsum("q,tqm->tm", self.quad_weights, q)
        return SolutionState(pts, avg, time)

    def evaluate(self, state: SolutionState, tri, bary) -> np.ndarray:
        """Reconstruction ``sum u_s phi_s + avg * phi_bubble`` at barycentric points of triangles ``tri``."""
        phi = basis.eval_basis(self.order, bary)
        local = self.local_values(state)[tri]
        return np.einsum("...n,...nm->...m", phi, local)

    def reconstructed_averages(self, state: SolutionState) -> np.ndarray:
        local = self.local_values(state)
        return np.einsum("q,qn,tnm->tm", self.quad_weights, self.quad_basis, local)

    def total(self, state: SolutionState) -> np.ndarray:
        """Integral of the averages, per component."""
        return self.mesh.areas @ state.averages
