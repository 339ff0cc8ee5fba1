"""Enriched quadratic/cubic Active Flux basis on triangles, and quadrature rules.

Local numbering for order 2: vertices 0-2, then the midpoints of edges
(0,1), (1,2), (2,0); for order 3: vertices, then two nodes per edge in the
same counter-clockwise edge order, the node closer to the edge's first vertex
first.  The last function (index ``N - 1``) is the bubble ``60 l1 l2 l3``
carrying the cell average; every point-value function has zero mean.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

BUBBLE_SCALE = 60.0


def n_basis(order: int) -> int:
    """Number of basis functions including the bubble (7 or 10)."""
    _check(order)
    return 3 * order + 1


def _check(order):
    if order not in (2, 3):
        raise ValueError(f"order must be 2 or 3, got {order}")


@lru_cache(maxsize=None)
def _nodes(order: int) -> np.ndarray:
    _check(order)
    nodes = [np.eye(3)[i] for i in range(3)]
    for a in range(3):
        b = (a + 1) % 3
        for s in range(1, order):
            lam = np.zeros(3)
            lam[a] = 1 - s / order
            lam[b] = s / order
            nodes.append(lam)
    out = np.array(nodes)
    out.setflags(write=False)
    return out


def point_nodes(order: int) -> np.ndarray:
    """Barycentric coordinates of the point DoFs, shape (N-1, 3)."""
    return _nodes(order)


def boundary_ring(order: int) -> list[int]:
    """Local point indices listed counter-clockwise around the element boundary."""
    _check(order)
    ring = []
    for a in range(3):
        ring.append(a)
        ring.extend(3 + a * (order - 1) + s for s in range(order - 1))
    return ring


def edge_local_nodes(order: int, local_edge: int) -> list[int]:
    """Local indices of the nodes on local edge (v_le -> v_le+1), in that direction."""
    a, b = local_edge, (local_edge + 1) % 3
    return [a] + [3 + local_edge * (order - 1) + s for s in range(order - 1)] + [b]


def eval_basis(order: int, bary) -> np.ndarray:
    """Values of all ``N`` shape functions at barycentric points, shape (..., N)."""
    return _eval(order, np.asarray(bary, dtype=float))[0]


def eval_basis_dbary(order: int, bary) -> np.ndarray:
    """Partial derivatives w.r.t. (l1, l2, l3), shape (..., N, 3)."""
    return _eval(order, np.asarray(bary, dtype=float))[1]


def eval_basis_grad(order: int, bary, vertices) -> np.ndarray:
    """Physical gradients of the shape functions on the triangle ``vertices`` (3, 2).

    Returns shape (..., N, 2).  Raises ``ValueError`` for a degenerate triangle.
    """
    g = barycentric_gradients(vertices)
    return eval_basis_dbary(order, bary) @ g


def barycentric_gradients(vertices) -> np.ndarray:
    p = np.asarray(vertices, dtype=float)
    area2 = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1])
    if abs(area2) <= 1e-300 or abs(area2) <= 1e-14 * np.ptp(p, axis=0).max() ** 2:
        raise ValueError("singular affine map: zero-area triangle")
    d = np.roll(p, -2, axis=0) - np.roll(p, -1, axis=0)
    return np.stack([-d[:, 1], d[:, 0]], axis=-1) / area2


def _eval(order, lam):
    _check(order)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    L = (l1, l2, l3)
    B = l1 * l2 * l3
    dB = np.stack([l2 * l3, l1 * l3, l1 * l2], axis=-1)
    zero = np.zeros_like(l1)
    vals, grads = [], []

    def unit(k, v):
        g = [zero, zero, zero]
        g[k] = v
        return np.stack(g, axis=-1)

    if order == 2:
        for i in range(3):
            vals.append(L[i] * (2 * L[i] - 1))
            grads.append(unit(i, 4 * L[i] - 1))
        for a in range(3):
            b = (a + 1) % 3
            # Lagrange midpoint function minus a third of the bubble
            vals.append(4 * L[a] * L[b] - 20.0 * B)
            g = unit(a, 4 * L[b]) + unit(b, 4 * L[a]) - 20.0 * dB
            grads.append(g)
    else:
        for i in range(3):
            li = L[i]
            vals.append(0.5 * li * (3 * li - 1) * (3 * li - 2) - 2.0 * B)
            grads.append(unit(i, 0.5 * (27 * li * li - 18 * li + 2)) - 2.0 * dB)
        for a in range(3):
            b = (a + 1) % 3
            for near, far in ((a, b), (b, a)):
                ln, lf = L[near], L[far]
                vals.append(4.5 * ln * lf * (3 * ln - 1) - 4.5 * B)
                g = unit(near, 4.5 * lf * (6 * ln - 1)) + unit(far, 4.5 * ln * (3 * ln - 1)) - 4.5 * dB
                grads.append(g)
    vals.append(BUBBLE_SCALE * B)
    grads.append(BUBBLE_SCALE * dB)
    return np.stack(vals, axis=-1), np.stack(grads, axis=-2)


def edge_lagrange(order: int, s) -> np.ndarray:
    """1D Lagrange weights of the ``order + 1`` equispaced edge nodes at parameters ``s`` in [0, 1]."""
    s = np.asarray(s, dtype=float)
    t = np.linspace(0.0, 1.0, order + 1)
    w = np.ones(s.shape + (order + 1,))
    for j in range(order + 1):
        for k in range(order + 1):
            if k != j:
                w[..., j] *= (s - t[k]) / (t[j] - t[k])
    return w


# ---------------------------------------------------------------- quadrature


def gauss_edge(n: int = 3):
    """Gauss-Legendre points on [0, 1] and weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def edge_quadrature(a, b, n: int = 3):
    """Physical Gauss points on segment a-b and weights summing to its length."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    s, w = gauss_edge(n)
    pts = (1 - s)[:, None] * a + s[:, None] * b
    return pts, w * np.linalg.norm(b - a)


# Dunavant symmetric rules: (weights, barycentric points), weights sum to 1.
def _orbit3(a, b):
    return [(a, b, b), (b, a, b), (b, b, a)]


def _orbit6(a, b, c):
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Symmetric triangle rule exact for the given degree (5 -> 7 points, 6 -> 12 points)."""
    if degree <= 5:
        pts = [(1 / 3, 1 / 3, 1 / 3)]
        wts = [0.225]
        a1, b1 = 0.059715871789769820459117580973, 0.470142064105115089770441209513
        a2, b2 = 0.797426985353087322398025276169, 0.101286507323456338800987361915
        w1, w2 = 0.132394152788506181334089951592, 0.125939180544827151999243381741
        pts += _orbit3(a1, b1) + _orbit3(a2, b2)
        wts += [w1] * 3 + [w2] * 3
    elif degree == 6:
        a1, b1 = 0.501426509658179, 0.249286745170910
        a2, b2 = 0.873821971016996, 0.063089014491502
        a3, b3, c3 = 0.053145049844817, 0.310352451033784, 0.636502499121399
        w1, w2, w3 = 0.116786275726379, 0.050844906370207, 0.082851075618374
        pts = _orbit3(a1, b1) + _orbit3(a2, b2) + _orbit6(a3, b3, c3)
        wts = [w1] * 3 + [w2] * 3 + [w3] * 6
    else:
        raise ValueError(f"no rule of degree {degree}")
    p = np.array(pts)
    p /= p.sum(axis=1, keepdims=True)
    w = np.array(wts)
    w /= w.sum()
    return w, p


def interior_quadrature(vertices, order: int = 2):
    """Points and weights (summing to |E|) on the triangle ``vertices`` for the given AF order."""
    w, lam = triangle_rule(5 if order == 2 else 6)
    p = np.asarray(vertices, dtype=float)
    area = 0.5 * abs((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
    return lam @ p, w * area


def rule_for_order(order: int):
    return triangle_rule(5 if order == 2 else 6)
