import numpy as np
import pytest

from monge_fem.fe_space import (
    FeFunction,
    build_space,
    element_derivatives,
    evaluate,
    evaluate_at_points,
    interpolate,
    reference_basis,
    reference_nodes,
)
from monge_fem.mesh import build_uniform_square_mesh
from monge_fem.problems import TEST1, TEST2
from monge_fem.quadrature import rule_for_degree


@pytest.fixture(scope="module")
def mesh4():
    return build_uniform_square_mesh(4)


@pytest.mark.parametrize("d", [2, 3])
def test_kronecker(d):
    vals, _, _ = reference_basis(d, reference_nodes(d))
    np.testing.assert_allclose(vals, np.eye(len(vals)), atol=1e-14)


def test_vertex_node_d2():
    vals, _, _ = reference_basis(2, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(vals, [1, 0, 0, 0, 0, 0])


def test_centroid_values_d2():
    vals, _, _ = reference_basis(2, [1 / 3, 1 / 3, 1 / 3])
    np.testing.assert_allclose(vals, [-1 / 9] * 3 + [4 / 9] * 3, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("q", range(1, 11))
def test_partition_of_unity_family(d, q):
    vals, grads, hess = reference_basis(d, rule_for_degree(q).points)
    np.testing.assert_allclose(vals.sum(axis=1), 1, atol=1e-12)
    np.testing.assert_allclose(grads.sum(axis=1), 0, atol=1e-12)
    np.testing.assert_allclose(hess.sum(axis=1), 0, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_reference_derivatives_match_finite_differences(d):
    rng = np.random.default_rng(11)
    p = rng.dirichlet([2, 2, 2], size=5)
    eps = 1e-5

    def at(xy):
        return reference_basis(d, np.column_stack([1 - xy.sum(axis=1), xy]))

    xy = p[:, 1:]
    _, g, H = at(xy)
    for k, e in enumerate(np.eye(2)):
        vp, gp, _ = at(xy + eps * e)
        vm, gm, _ = at(xy - eps * e)
        np.testing.assert_allclose((vp - vm) / (2 * eps), g[..., k], atol=1e-8)
        np.testing.assert_allclose((gp - gm) / (2 * eps), H[..., k, :], atol=1e-7)


def test_unsupported_degree():
    with pytest.raises(ValueError):
        reference_basis(1, [1, 0, 0])
    with pytest.raises(ValueError):
        build_space(build_uniform_square_mesh(1), 4)


@pytest.mark.parametrize("n, d, n_dof", [(1, 2, 9), (2, 2, 25), (1, 3, 16), (4, 3, 169)])
def test_dof_counts(n, d, n_dof):
    mesh = build_uniform_square_mesh(n)
    space = build_space(mesh, d)
    assert space.n_dof == n_dof
    n_int = (d - 1) * (d - 2) // 2
    assert n_dof == mesh.n_vertices + (d - 1) * mesh.n_edges + n_int * mesh.n_triangles


@pytest.mark.parametrize("d", [2, 3])
def test_nodes_and_boundary(mesh4, d):
    space = build_space(mesh4, d)
    x, y = space.nodes.T
    on_bnd = np.isclose(x, 0) | np.isclose(x, 1) | np.isclose(y, 0) | np.isclose(y, 1)
    np.testing.assert_array_equal(np.flatnonzero(on_bnd), space.boundary_dofs)
    # distinct nodes get distinct dofs
    assert len(np.unique(np.round(space.nodes, 12), axis=0)) == space.n_dof


@pytest.mark.parametrize("d", [2, 3])
def test_edge_continuity_fuzz(mesh4, d):
    space = build_space(mesh4, d)
    rng = np.random.default_rng(5)
    mesh = mesh4
    for trial in range(5):
        u = FeFunction(space, rng.standard_normal(space.n_dof))
        for e, (a, b) in enumerate(mesh.edges):
            cells = np.flatnonzero((mesh.tri_edges == e).any(axis=1))
            if len(cells) != 2:
                continue
            ts = rng.random(4)
            pts = mesh.vertices[a] + ts[:, None] * (mesh.vertices[b] - mesh.vertices[a])
            vals = []
            for c in cells:
                ref = (space.Binv[c] @ (pts - space.offsets[c]).T).T
                bary = np.column_stack([1 - ref.sum(axis=1), ref])
                vals.append(reference_basis(d, bary)[0] @ u.coefficients[space.cell_dofs[c]])
            np.testing.assert_allclose(vals[0], vals[1], atol=1e-12)


def test_interpolate_constant(mesh4):
    u = interpolate(build_space(mesh4, 2), lambda x, y: np.ones_like(x))
    np.testing.assert_array_equal(u.coefficients, 1.0)


def test_interpolate_rejects_non_finite(mesh4):
    with pytest.raises(ValueError, match="node"):
        interpolate(build_space(mesh4, 2), lambda x, y: np.where(np.isclose(x, 0.5), np.nan, x))


def test_interpolate_reproduces_quadratic_at_random_points(mesh4):
    u = interpolate(build_space(mesh4, 2), lambda x, y: x**2 + y)
    pts = np.random.default_rng(2).random((50, 2))
    np.testing.assert_allclose(evaluate_at_points(u, pts), pts[:, 0] ** 2 + pts[:, 1], atol=1e-12)


POLYS = {
    2: (lambda x, y: 1 + x - 2 * y + 3 * x * x - x * y + 0.5 * y * y,
        lambda x, y: (1 + 6 * x - y, -2 - x + y),
        lambda x, y: ((6, -1), (-1, 1))),
    3: (lambda x, y: x**3 - 2 * x * x * y + y**3 + x * y,
        lambda x, y: (3 * x * x - 4 * x * y + y, -2 * x * x + 3 * y * y + x),
        lambda x, y: ((6 * x - 4 * y, -4 * x + 1), (-4 * x + 1, 6 * y))),
}


@pytest.mark.parametrize("d", [2, 3])
def test_polynomial_reproduction(mesh4, d):
    space = build_space(mesh4, d)
    f, grad, hess = POLYS[d]
    u = interpolate(space, f)
    rule = rule_for_degree(6)
    val, g, H = element_derivatives(u, rule.points)
    pts = space.physical_points(rule.points)
    x, y = pts[..., 0], pts[..., 1]
    np.testing.assert_allclose(val, f(x, y), atol=1e-12)
    gx, gy = grad(x, y)
    np.testing.assert_allclose(g[..., 0], gx, atol=1e-11)
    np.testing.assert_allclose(g[..., 1], gy, atol=1e-11)
    ref = np.array(hess(x, y), dtype=object)
    for i in range(2):
        for j in range(2):
            np.testing.assert_allclose(H[..., i, j], np.broadcast_to(ref[i][j], x.shape).astype(float), atol=1e-9)


def test_eval_quadratic_examples(mesh4):
    space = build_space(mesh4, 2)
    u = interpolate(space, lambda x, y: 0.5 * (x * x + y * y))
    v = interpolate(space, lambda x, y: x * y)
    rng = np.random.default_rng(9)
    for t in rng.integers(0, mesh4.n_triangles, 10):
        p = rng.dirichlet([1, 1, 1])
        value, grad, H = evaluate(u, t, p)
        x, y = space.physical_points(p)[t, 0]
        assert value == pytest.approx(0.5 * (x * x + y * y), abs=1e-14)
        np.testing.assert_allclose(grad, [x, y], atol=1e-13)
        np.testing.assert_allclose(H, (1, 0, 1), atol=1e-12)
        np.testing.assert_allclose(evaluate(v, t, p)[2], (0, 1, 0), atol=1e-12)


def test_hessian_of_cubic_is_first_order():
    # d = 2 sees x^3 through a piecewise-constant Hessian: max error O(h)
    errs = []
    for n in (8, 16):
        space = build_space(build_uniform_square_mesh(n), 2)
        u = interpolate(space, lambda x, y: x**3)
        rule = rule_for_degree(4)
        _, _, H = element_derivatives(u, rule.points)
        x = space.physical_points(rule.points)[..., 0]
        errs.append(max(np.abs(H[..., 0, 0] - 6 * x).max(), np.abs(H[..., 0, 1]).max(), np.abs(H[..., 1, 1]).max()))
    assert 1.5 <= errs[0] / errs[1] <= 2.5


def test_interpolation_error_order_test1():
    errs = []
    for n in (8, 16):
        space = build_space(build_uniform_square_mesh(n), 2)
        u = interpolate(space, TEST1.exact_u)
        val, _, _ = element_derivatives(u, np.array([[1 / 3, 1 / 3, 1 / 3]]))
        c = space.physical_points(np.array([[1 / 3, 1 / 3, 1 / 3]]))
        errs.append(np.abs(val - TEST1.exact_u(c[..., 0], c[..., 1])).max())
    assert 6 <= errs[0] / errs[1] <= 10


def test_test2_boundary_data_is_finite():
    space = build_space(build_uniform_square_mesh(8), 2)
    assert np.all(np.isfinite(interpolate(space, TEST2.g).coefficients))
