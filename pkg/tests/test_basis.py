import numpy as np
import pytest
from hypothesis import given, strategies as st

from activeflux import basis


def random_triangle(rng):
    while True:
        v = rng.uniform(-1, 1, (3, 2))
        area = 0.5 * ((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
        if abs(area) > 1e-2:
            return v if area > 0 else v[[0, 2, 1]]


@pytest.mark.parametrize("order, n", [(2, 7), (3, 10)])
def test_basis_size(order, n):
    assert basis.n_basis(order) == n
    assert basis.point_nodes(order).shape == (n - 1, 3)


def test_order_validated():
    with pytest.raises(ValueError):
        basis.n_basis(4)


@pytest.mark.parametrize("order", [2, 3])
def test_kronecker_at_point_nodes(order):
    phi = basis.eval_basis(order, basis.point_nodes(order))
    n = basis.n_basis(order)
    assert np.allclose(phi[:, : n - 1], np.eye(n - 1), atol=1e-13)
    assert np.allclose(phi[:, -1], 0.0, atol=1e-13)


@pytest.mark.parametrize("order", [2, 3])
def test_means(order):
    w, lam = basis.rule_for_order(order)
    means = w @ basis.eval_basis(order, lam)
    assert np.allclose(means[:-1], 0.0, atol=1e-14)
    assert means[-1] == pytest.approx(1.0, abs=1e-14)


def test_quadratic_bubble_is_60_l1l2l3():
    lam = np.array([[0.2, 0.3, 0.5], [1 / 3, 1 / 3, 1 / 3]])
    assert np.allclose(basis.eval_basis(2, lam)[:, -1], 60 * lam.prod(axis=1))


@pytest.mark.parametrize("order", [2, 3])
def test_partition_of_unity_on_points(order):
    # sum of point functions plus bubble reproduces constants
    rng = np.random.default_rng(1)
    lam = rng.dirichlet([1, 1, 1], 20)
    assert np.allclose(basis.eval_basis(order, lam).sum(axis=1), 1.0)


@pytest.mark.parametrize("order", [2, 3])
def test_reproduces_polynomials_of_its_degree(order):
    rng = np.random.default_rng(2)
    v = random_triangle(rng)
    lam = rng.dirichlet([1, 1, 1], 15)
    x = lam @ v
    coeff = rng.normal(size=10)

    def p(x):
        X, Y = x[..., 0], x[..., 1]
        terms = [np.ones_like(X), X, Y, X * X, X * Y, Y * Y, X ** 3, X * X * Y, X * Y * Y, Y ** 3]
        k = {2: 6, 3: 10}[order]
        return sum(c * t for c, t in zip(coeff[:k], terms[:k]))

    nodes = basis.point_nodes(order) @ v
    w, ql = basis.rule_for_order(order)
    avg = w @ p(ql @ v)
    dofs = np.concatenate([p(nodes), [avg]])
    assert np.allclose(basis.eval_basis(order, lam) @ dofs, p(x), atol=1e-11)


@given(st.integers(0, 10_000))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    v = random_triangle(rng)
    lam = rng.dirichlet([2, 2, 2], 1)
    g = basis.eval_basis_grad(3, lam, v)[0]  # (N, 2)
    gl = basis.barycentric_gradients(v)
    h = 1e-6
    for d in range(2):
        shift = np.zeros(2)
        shift[d] = h
        dl = gl @ shift
        fd = (basis.eval_basis(3, lam + dl) - basis.eval_basis(3, lam - dl))[0] / (2 * h)
        assert np.allclose(g[:, d], fd, atol=1e-5 * (1 + np.abs(fd).max()))


@pytest.mark.parametrize("degree", [5, 6])
def test_triangle_rule_exactness(degree):
    w, lam = basis.triangle_rule(degree)
    assert w.sum() == pytest.approx(1.0)
    # mean of l1^a l2^b l3^c over the triangle is 2 a! b! c! / (a+b+c+2)!
    from math import factorial
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            c = degree - a - b
            exact = 2 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)
            assert w @ (lam[:, 0] ** a * lam[:, 1] ** b * lam[:, 2] ** c) == pytest.approx(exact, rel=1e-12)


def test_gauss_edge_integrates_quintics():
    s, w = basis.gauss_edge(3)
    for k in range(6):
        assert w @ s ** k == pytest.approx(1 / (k + 1), rel=1e-13)


@pytest.mark.parametrize("order", [2, 3])
def test_edge_lagrange_interpolates(order):
    s = np.linspace(0, 1, order + 1)
    assert np.allclose(basis.edge_lagrange(order, s), np.eye(order + 1), atol=1e-14)


@pytest.mark.parametrize("order", [2, 3])
def test_edge_trace_matches_volume_basis(order):
    # the trace of the element basis on edge (v0 -> v1) is the 1D Lagrange basis of its nodes
    s = np.array([0.1, 0.45, 0.8])
    lam = np.stack([1 - s, s, 0 * s], axis=1)
    phi = basis.eval_basis(order, lam)
    nodes = basis.edge_local_nodes(order, 0)
    assert np.allclose(phi[:, nodes], basis.edge_lagrange(order, s), atol=1e-13)
    others = [i for i in range(basis.n_basis(order)) if i not in nodes]
    assert np.allclose(phi[:, others], 0.0, atol=1e-13)
