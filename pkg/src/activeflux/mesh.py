"""Conforming triangulations and the geometric tables the schemes need.

A :class:`Mesh` stores counter-clockwise triangles, a deduplicated edge list
with left/right neighbours and boundary tags.  :func:`build_dof_map` lays the
Active Flux degrees of freedom on top of it and :func:`build_geometry_tables`
computes node normals and the sub-element partition used by the first-order
point scheme.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import basis

logger = logging.getLogger(__name__)

DEFAULT_TAG = "boundary"


class MeshError(ValueError):
    """Invalid or unsupported mesh input."""


@dataclass(eq=False)
class Mesh:
    """Triangulation with edge connectivity.

    Edges are stored as vertex pairs oriented so that ``edge_tris[:, 0]`` (the
    left triangle) lies to the left of ``vertices[a] -> vertices[b]``.  Edge
    normals point from left to right, hence outward on the boundary.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_tris: np.ndarray
    boundary_tags: dict[int, str]
    tri_edges: np.ndarray = field(repr=False)
    tri_edge_sign: np.ndarray = field(repr=False)
    areas: np.ndarray = field(repr=False)
    edge_lengths: np.ndarray = field(repr=False)
    edge_normals: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_tris[:, 1] < 0)

    @property
    def tags(self) -> list[str]:
        return sorted(set(self.boundary_tags.values()))

    def edges_with_tag(self, tag: str) -> np.ndarray:
        return np.array(sorted(e for e, t in self.boundary_tags.items() if t == tag), dtype=int)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def characteristic_size(self) -> float:
        """Mean triangle diameter (longest edge)."""
        return float(np.mean(self.edge_lengths[self.tri_edges].max(axis=1)))

    def perimeters(self) -> np.ndarray:
        return self.edge_lengths[self.tri_edges].sum(axis=1)

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the three barycentric coordinates, shape (T, 3, 2)."""
        p = self.vertices[self.triangles]
        # grad(lambda_k) = rot(p_{k+2} - p_{k+1}) / (2|E|), rotated clockwise
        d = np.roll(p, -2, axis=1) - np.roll(p, -1, axis=1)
        g = np.stack([-d[..., 1], d[..., 0]], axis=-1)
        return g / (2.0 * self.areas[:, None, None])

    def triangle_neighbours(self) -> np.ndarray:
        """Face neighbours, shape (T, 3), -1 on the boundary; column k is across local edge k."""
        left = self.edge_tris[self.tri_edges, 0]
        right = self.edge_tris[self.tri_edges, 1]
        me = np.arange(self.n_triangles)[:, None]
        return np.where(left == me, right, left)

    def vertex_neighbourhoods(self) -> list[np.ndarray]:
        """For each triangle, the sorted triangles sharing a face or a vertex with it (itself excluded)."""
        tris_of_vertex = vertex_to_triangles(self)
        out = []
        for k, tri in enumerate(self.triangles):
            nb = np.unique(np.concatenate([tris_of_vertex[v] for v in tri]))
            out.append(nb[nb != k])
        return out

    @classmethod
    def from_triangles(cls, vertices, triangles, tagged_segments=None, default_tag=DEFAULT_TAG):
        """Build connectivity from raw triangles.

        Args:
            vertices: (V, 2) coordinates.
            triangles: (T, 3) vertex indices; clockwise triangles are flipped.
            tagged_segments: optional mapping ``(a, b) -> tag`` for boundary edges.
            default_tag: tag given to boundary edges absent from ``tagged_segments``.
        """
        vertices = np.ascontiguousarray(np.asarray(vertices, dtype=float)[:, :2])
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if len(triangles) == 0:
            raise MeshError("mesh has no triangles")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError("triangle references a missing vertex")

        p = vertices[triangles]
        signed = 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
        scale = np.max(np.ptp(vertices, axis=0)) ** 2
        if np.any(np.abs(signed) <= 1e-14 * scale):
            bad = int(np.flatnonzero(np.abs(signed) <= 1e-14 * scale)[0])
            raise MeshError(f"triangle {bad} has zero area")
        cw = signed < 0
        triangles[cw] = triangles[cw][:, [0, 2, 1]]
        areas = np.abs(signed)

        # directed half-edges (v_k -> v_{k+1})
        src = triangles.reshape(-1)
        dst = np.roll(triangles, -1, axis=1).reshape(-1)
        keys = np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1)
        uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        if np.any(counts > 2):
            raise MeshError("non-conforming mesh: an edge is shared by more than two triangles")
        n_edges = len(uniq)
        half_tri = np.repeat(np.arange(len(triangles)), 3)
        forward = src < dst

        edge_tris = np.full((n_edges, 2), -1, dtype=np.int64)
        edges = np.empty((n_edges, 2), dtype=np.int64)
        # forward half-edges define orientation where present
        fwd = np.flatnonzero(forward)
        bwd = np.flatnonzero(~forward)
        has_fwd = np.zeros(n_edges, dtype=bool)
        if np.any(np.bincount(inverse[fwd], minlength=n_edges) > 1) or \
                np.any(np.bincount(inverse[bwd], minlength=n_edges) > 1):
            raise MeshError("inconsistent orientation: an edge is traversed twice in the same direction")
        has_fwd[inverse[fwd]] = True
        edge_tris[inverse[fwd], 0] = half_tri[fwd]
        edges[inverse[fwd]] = np.stack([src[fwd], dst[fwd]], axis=1)
        only_bwd = ~has_fwd[inverse[bwd]]
        b_lone = bwd[only_bwd]
        edge_tris[inverse[b_lone], 0] = half_tri[b_lone]
        edges[inverse[b_lone]] = np.stack([src[b_lone], dst[b_lone]], axis=1)
        b_pair = bwd[~only_bwd]
        edge_tris[inverse[b_pair], 1] = half_tri[b_pair]

        tri_edges = inverse.reshape(-1, 3)
        tri_edge_sign = np.where(edge_tris[tri_edges, 0] == np.arange(len(triangles))[:, None], 1, -1)

        d = vertices[edges[:, 1]] - vertices[edges[:, 0]]
        lengths = np.hypot(d[:, 0], d[:, 1])
        normals = np.stack([d[:, 1], -d[:, 0]], axis=1) / lengths[:, None]

        tagged = {}
        if tagged_segments:
            for (a, b), tag in tagged_segments.items():
                tagged[(min(a, b), max(a, b))] = tag
        boundary_tags = {}
        for e in np.flatnonzero(edge_tris[:, 1] < 0):
            a, b = edges[e]
            boundary_tags[int(e)] = tagged.get((min(a, b), max(a, b)), default_tag)

        return cls(vertices=vertices, triangles=triangles, edges=edges, edge_tris=edge_tris,
                   boundary_tags=boundary_tags, tri_edges=tri_edges, tri_edge_sign=tri_edge_sign,
                   areas=areas, edge_lengths=lengths, edge_normals=normals)


def vertex_to_triangles(mesh: Mesh) -> list[np.ndarray]:
    order = np.argsort(mesh.triangles.reshape(-1), kind="stable")
    verts = mesh.triangles.reshape(-1)[order]
    tris = order // 3
    splits = np.searchsorted(verts, np.arange(1, mesh.n_vertices))
    return np.split(tris, splits)


def structured_mesh(nx: int, ny: int, domain=(0.0, 1.0, 0.0, 1.0), transform=None) -> Mesh:
    """Cartesian ``nx x ny`` grid with every cell cut along its lower-left/upper-right diagonal.

    Boundary edges are tagged ``left``, ``right``, ``bottom`` and ``top``.  An
    optional ``transform`` maps the (V, 2) vertex array after construction; it
    must preserve orientation.
    """
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be >= 1")
    x0, x1, y0, y1 = map(float, domain)
    if not (x1 > x0 and y1 > y0):
        raise MeshError(f"degenerate rectangle {domain}")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)
    if transform is not None:
        vertices = np.asarray(transform(vertices), dtype=float)

    def vid(i, j):
        return j * (nx + 1) + i

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    i, j = i.ravel(), j.ravel()
    p00, p10, p01, p11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    lower = np.stack([p00, p10, p11], axis=1)
    upper = np.stack([p00, p11, p01], axis=1)
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    segs = {}
    for k in range(nx):
        segs[(vid(k, 0), vid(k + 1, 0))] = "bottom"
        segs[(vid(k, ny), vid(k + 1, ny))] = "top"
    for k in range(ny):
        segs[(vid(0, k), vid(0, k + 1))] = "left"
        segs[(vid(nx, k), vid(nx, k + 1))] = "right"
    return Mesh.from_triangles(vertices, triangles, segs)


def refine_split_edges(mesh: Mesh, k: int) -> Mesh:
    """Split every edge into ``k`` equal parts; each triangle becomes ``k**2`` similar ones."""
    if k not in (2, 3):
        raise MeshError("refinement factor must be 2 or 3")
    V, E = mesh.n_vertices, mesh.n_edges
    verts = [mesh.vertices]
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    for j in range(1, k):
        t = j / k
        verts.append((1 - t) * mesh.vertices[a] + t * mesh.vertices[b])
    # edge point j of edge e lives at V + (j - 1) * E + e
    interior_start = V + (k - 1) * E
    if k == 3:
        verts.append(mesh.centroids())
    vertices = np.concatenate(verts)

    def edge_point(e, s):
        # point at parameter s/k measured from the edge's first vertex
        return V + (s - 1) * E + e

    new_tris = []
    T = mesh.n_triangles
    # lattice point (i, j) has barycentric (i/k, j/k, (k-i-j)/k) w.r.t. (v0, v1, v2) ... index via dict per triangle
    lattice = [(i, j) for i in range(k + 1) for j in range(k + 1 - i)]
    lat_index = {p: n for n, p in enumerate(lattice)}
    ids = np.empty((T, len(lattice)), dtype=np.int64)
    tri = mesh.triangles
    for n, (i, j) in enumerate(lattice):
        l = k - i - j
        # barycentric weights on (v0, v1, v2) = (i, j, l) / k
        if i == k:
            ids[:, n] = tri[:, 0]
        elif j == k:
            ids[:, n] = tri[:, 1]
        elif l == k:
            ids[:, n] = tri[:, 2]
        elif l == 0:  # on local edge 0: v0 -> v1, parameter j/k from v0
            ids[:, n] = _edge_lattice_id(mesh, 0, j, k, edge_point)
        elif i == 0:  # local edge 1: v1 -> v2, parameter l/k from v1
            ids[:, n] = _edge_lattice_id(mesh, 1, l, k, edge_point)
        elif j == 0:  # local edge 2: v2 -> v0, parameter i/k from v2
            ids[:, n] = _edge_lattice_id(mesh, 2, i, k, edge_point)
        else:
            ids[:, n] = interior_start + np.arange(T)
    for i in range(k):
        for j in range(k - i):
            # upward triangle: (i+1,j), (i,j+1), (i,j) is CCW in (v0,v1,v2) orientation
            new_tris.append(ids[:, [lat_index[(i + 1, j)], lat_index[(i, j + 1)], lat_index[(i, j)]]])
            if i + j < k - 1:
                new_tris.append(ids[:, [lat_index[(i + 1, j)], lat_index[(i + 1, j + 1)], lat_index[(i, j + 1)]]])
    triangles = np.stack(new_tris, axis=1).reshape(-1, 3)

    segs = {}
    for e, tag in mesh.boundary_tags.items():
        chain = [mesh.edges[e, 0]] + [edge_point(e, s) for s in range(1, k)] + [mesh.edges[e, 1]]
        for p, q in zip(chain[:-1], chain[1:]):
            segs[(int(p), int(q))] = tag
    return Mesh.from_triangles(vertices, triangles, segs)


def _edge_lattice_id(mesh, local_edge, s, k, edge_point):
    """Global id of the point at parameter s/k along local edge (v_le -> v_le+1) of every triangle."""
    e = mesh.tri_edges[:, local_edge]
    same = mesh.tri_edge_sign[:, local_edge] > 0
    s_global = np.where(same, s, k - s)
    return edge_point(e, s_global)


@dataclass(eq=False)
class DofMap:
    """Global numbering of point values and averages.

    Point DoFs are numbered vertices first, then ``order - 1`` nodes per edge
    ordered by edge index and by parameter along the stored edge orientation.
    Average DoF ``k`` belongs to triangle ``k``.
    """

    order: int
    n_vertices: int
    n_edges: int
    n_triangles: int
    tri_points: np.ndarray  # (T, N-1) global point ids in local basis order
    edge_points: np.ndarray  # (E, order+1) point ids along each edge, endpoints included
    point_xy: np.ndarray

    @property
    def n_points(self) -> int:
        return self.n_vertices + (self.order - 1) * self.n_edges

    @property
    def n_averages(self) -> int:
        return self.n_triangles

    @property
    def n_total(self) -> int:
        return self.n_points + self.n_averages

    def tri_dofs(self) -> np.ndarray:
        """Per-triangle local->global list; the average is numbered after all point DoFs."""
        avg = self.n_points + np.arange(self.n_triangles)
        return np.concatenate([self.tri_points, avg[:, None]], axis=1)


def count_dofs(n_vertices: int, n_edges: int, n_triangles: int, order: int) -> tuple[int, int]:
    """(point DoFs, total DoFs) from mesh counts."""
    points = n_vertices + (order - 1) * n_edges
    return points, points + n_triangles


def build_dof_map(mesh: Mesh, order: int) -> DofMap:
    if order not in (2, 3):
        raise ValueError(f"order must be 2 or 3, got {order}")
    V, E = mesh.n_vertices, mesh.n_edges
    k = order
    edge_pts = np.empty((E, k + 1), dtype=np.int64)
    edge_pts[:, 0] = mesh.edges[:, 0]
    edge_pts[:, -1] = mesh.edges[:, 1]
    for s in range(1, k):
        edge_pts[:, s] = V + np.arange(E) * (k - 1) + (s - 1)

    T = mesh.n_triangles
    tri_pts = np.empty((T, 3 * k), dtype=np.int64)
    tri_pts[:, :3] = mesh.triangles
    for le in range(3):
        e = mesh.tri_edges[:, le]
        same = mesh.tri_edge_sign[:, le] > 0
        for s in range(1, k):
            # local node s along v_le -> v_le+1
            s_glob = np.where(same, s, k - s)
            tri_pts[:, 3 + le * (k - 1) + (s - 1)] = V + e * (k - 1) + (s_glob - 1)

    xy = np.empty((V + (k - 1) * E, 2))
    xy[:V] = mesh.vertices
    a, b = mesh.vertices[mesh.edges[:, 0]], mesh.vertices[mesh.edges[:, 1]]
    for s in range(1, k):
        t = s / k
        xy[V + np.arange(E) * (k - 1) + (s - 1)] = (1 - t) * a + t * b
    return DofMap(order=order, n_vertices=V, n_edges=E, n_triangles=T,
                  tri_points=tri_pts, edge_points=edge_pts, point_xy=xy)


@dataclass(eq=False)
class NodeNormalTable:
    """Scaled node normals, shape (T, N-1, 2), in local basis order."""

    normals: np.ndarray


@dataclass(eq=False)
class SubElementPartition:
    """Fan of ``N - 1`` sub-triangles around the centroid of every element.

    ``local_nodes[i]`` lists the local node indices of sub-triangle ``i``
    (``b_i``, centroid, ``b_{i+1}``); the centroid is local index ``N - 1``,
    the slot of the average.  ``inward_normals[t, i, j]`` is the inward scaled
    normal opposite node ``j`` of sub-triangle ``i`` in triangle ``t``.
    """

    local_nodes: np.ndarray  # (N-1, 3)
    areas: np.ndarray  # (T, N-1)
    inward_normals: np.ndarray  # (T, N-1, 3, 2)
    dual_measure: np.ndarray  # (n_points,)


def build_geometry_tables(mesh: Mesh, order: int, dofmap: DofMap | None = None):
    """Node normals for the high-order point update and the sub-element partition."""
    if dofmap is None:
        dofmap = build_dof_map(mesh, order)
    nodes = basis.point_nodes(order)
    npt = len(nodes)
    # scaled inward normal opposite vertex k is 2|E| grad(lambda_k)
    inward = mesh.barycentric_gradients() * (2.0 * mesh.areas[:, None, None])
    T = mesh.n_triangles
    normals = np.empty((T, npt, 2))
    normals[:, :3] = inward
    k = order
    for le in range(3):
        opposite = (le + 2) % 3
        for s in range(k - 1):
            normals[:, 3 + le * (k - 1) + s] = -inward[:, opposite]

    ring = basis.boundary_ring(order)
    centroid_slot = npt
    local_nodes = np.array([[ring[i], centroid_slot, ring[(i + 1) % npt]] for i in range(npt)])
    p = mesh.vertices[mesh.triangles]  # (T, 3, 2)
    node_bary = np.concatenate([nodes, [[1 / 3, 1 / 3, 1 / 3]]])
    node_xy = np.einsum("nk,tkd->tnd", node_bary, p)  # (T, N, 2)
    sub_xy = node_xy[:, local_nodes]  # (T, N-1, 3, 2)
    d1 = sub_xy[:, :, 1] - sub_xy[:, :, 0]
    d2 = sub_xy[:, :, 2] - sub_xy[:, :, 0]
    signed = 0.5 * (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])
    sub_areas = np.abs(signed)
    # inward normal opposite node j: rotate (x_{j+2} - x_{j+1}) towards x_j
    e = np.roll(sub_xy, -2, axis=2) - np.roll(sub_xy, -1, axis=2)
    rot = np.stack([-e[..., 1], e[..., 0]], axis=-1)
    sub_normals = rot * np.sign(signed)[:, :, None, None]

    per_tri = 2.0 * mesh.areas / (3.0 * npt)
    dual = np.bincount(dofmap.tri_points.ravel(), weights=np.repeat(per_tri, npt),
                       minlength=dofmap.n_points)
    return NodeNormalTable(normals), SubElementPartition(local_nodes, sub_areas, sub_normals, dual)


def euler_audit(mesh: Mesh) -> dict:
    """Counts and Euler-relation check used by ``mesh-info``."""
    chi = mesh.euler_characteristic()
    # boundary loops = 1 + holes for a connected planar mesh
    b = mesh.boundary_edges
    g = {}
    for e in b:
        a, c = mesh.edges[e]
        g.setdefault(a, []).append(c)
        g.setdefault(c, []).append(a)
    seen, loops = set(), 0
    for start in g:
        if start in seen:
            continue
        loops += 1
        stack = [start]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(g[v])
    holes = max(loops - 1, 0)
    return {
        "vertices": mesh.n_vertices,
        "edges": mesh.n_edges,
        "triangles": mesh.n_triangles,
        "boundary_edges": len(b),
        "holes": holes,
        "euler_characteristic": chi,
        "euler_ok": chi == 1 - holes,
        "h": mesh.characteristic_size(),
        "tags": {t: len(mesh.edges_with_tag(t)) for t in mesh.tags},
    }


# ---------------------------------------------------------------- GMSH reader


def load_gmsh(path) -> Mesh:
    """Read an ASCII GMSH file (format 2.2 or 4.1) with line and triangle elements."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    sections = _split_sections(lines)
    if "MeshFormat" not in sections:
        raise MeshError(f"{path}: missing $MeshFormat")
    fmt = sections["MeshFormat"][0].split()
    version, filetype = fmt[0], fmt[1]
    if filetype != "0":
        raise MeshError(f"{path}: only ASCII files are supported")
    names = {}
    for row in sections.get("PhysicalNames", [])[1:]:
        parts = row.split(maxsplit=2)
        names[(int(parts[0]), int(parts[1]))] = parts[2].strip().strip('"')
    try:
        if version.startswith("2"):
            nodes, lines_el, tris = _gmsh22(sections)
        elif version.startswith("4"):
            nodes, lines_el, tris = _gmsh41(sections)
        else:
            raise MeshError(f"{path}: unsupported GMSH version {version}")
    except (IndexError, ValueError, KeyError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: parse failure ({exc})") from exc

    if not tris:
        raise MeshError(f"{path}: no triangle elements")
    tri = np.array([t for t, _ in tris], dtype=np.int64)
    used = np.unique(tri)
    tags = np.array(sorted(nodes))
    coords = np.array([nodes[t] for t in tags])
    tag_to_row = {t: i for i, t in enumerate(tags)}
    keep = np.array([tag_to_row[t] for t in used])
    new_id = {int(t): i for i, t in enumerate(used)}
    vertices = coords[keep]
    triangles = np.vectorize(new_id.__getitem__)(tri)
    segs = {}
    for (a, b), phys in lines_el:
        if a in new_id and b in new_id:
            segs[(new_id[a], new_id[b])] = names.get((1, phys), str(phys))
    return Mesh.from_triangles(vertices, triangles, segs)


def _split_sections(lines):
    sections, current, buf = {}, None, []
    for raw in lines:
        line = raw.strip()
        if line.startswith("$End"):
            if current is not None:
                sections[current] = buf
            current, buf = None, []
        elif line.startswith("$"):
            current, buf = line[1:], []
        elif current is not None and line:
            buf.append(line)
    return sections


def _gmsh22(sections):
    rows = sections["Nodes"]
    n = int(rows[0])
    nodes = {}
    for row in rows[1:n + 1]:
        p = row.split()
        nodes[int(p[0])] = (float(p[1]), float(p[2]))
    rows = sections["Elements"]
    n = int(rows[0])
    lines_el, tris = [], []
    for row in rows[1:n + 1]:
        p = [int(x) for x in row.split()]
        etype, ntags = p[1], p[2]
        phys = p[3] if ntags > 0 else 0
        conn = p[3 + ntags:]
        _collect(etype, conn, phys, lines_el, tris)
    return nodes, lines_el, tris


def _gmsh41(sections):
    # entity tag -> physical tag for curves and surfaces
    ent_phys = {}
    if "Entities" in sections:
        rows = sections["Entities"]
        counts = [int(x) for x in rows[0].split()]
        r = 1
        for dim, cnt in enumerate(counts):
            for _ in range(cnt):
                p = rows[r].split()
                r += 1
                if dim == 0:
                    nphys = int(p[4])
                    phys = [int(x) for x in p[5:5 + nphys]]
                else:
                    nphys = int(p[7])
                    phys = [int(x) for x in p[8:8 + nphys]]
                ent_phys[(dim, int(p[0]))] = phys[0] if phys else 0
    rows = sections["Nodes"]
    nblocks = int(rows[0].split()[0])
    r = 1
    nodes = {}
    for _ in range(nblocks):
        _, _, parametric, count = (int(x) for x in rows[r].split())
        r += 1
        ids = [int(rows[r + i]) for i in range(count)]
        r += count
        for i in range(count):
            c = rows[r + i].split()
            nodes[ids[i]] = (float(c[0]), float(c[1]))
        r += count
    rows = sections["Elements"]
    nblocks = int(rows[0].split()[0])
    r = 1
    lines_el, tris = [], []
    for _ in range(nblocks):
        dim, ent, etype, count = (int(x) for x in rows[r].split())
        r += 1
        phys = ent_phys.get((dim, ent), 0)
        for i in range(count):
            p = [int(x) for x in rows[r + i].split()]
            _collect(etype, p[1:], phys, lines_el, tris)
        r += count
    return nodes, lines_el, tris


def _collect(etype, conn, phys, lines_el, tris):
    if etype == 1:
        lines_el.append(((conn[0], conn[1]), phys))
    elif etype == 2:
        tris.append((conn[:3], phys))
    elif etype == 15:
        pass  # geometry points carry no connectivity
    else:
        raise MeshError(f"unsupported element type {etype}")
