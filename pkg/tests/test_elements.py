import numpy as np
import pytest

from logconfem.elements import element_basis, metric_tensor, reference_rule
from logconfem.errors import GeometryError

UNIT_TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_partition_of_unity():
    for kind in ("tri", "quad"):
        _, _, n, _ = reference_rule(kind)
        assert np.max(np.abs(n.sum(axis=1) - 1.0)) < 1e-14


def test_triangle_area_from_weights():
    b = element_basis("tri", UNIT_TRI)
    assert b.wdet.sum() == pytest.approx(0.5)


def test_quad_integrates_xy():
    b = element_basis("quad", UNIT_SQUARE)
    xy = b.qp_xy[:, 0] * b.qp_xy[:, 1]
    assert (b.wdet * xy).sum() == pytest.approx(0.25)


def test_gradient_consistency():
    # gradients of the constant-1 interpolant vanish
    rng = np.random.default_rng(0)
    for kind, ref in (("tri", UNIT_TRI), ("quad", UNIT_SQUARE)):
        coords = ref + 0.1 * rng.standard_normal(ref.shape)
        b = element_basis(kind, coords)
        assert np.max(np.abs(b.grad.sum(axis=1))) < 1e-13


def test_affine_triangle_linear_field_gradient():
    # gradient of x + 2y is (1, 2) everywhere on an affine-mapped triangle
    coords = np.array([[0.3, -0.2], [1.7, 0.4], [0.1, 2.2]])
    b = element_basis("tri", coords)
    vals = coords[:, 0] + 2.0 * coords[:, 1]
    grad = np.einsum("qni,n->qi", b.grad, vals)
    assert np.allclose(grad, [1.0, 2.0], atol=1e-13)


def test_quad_bilinear_exactness():
    # Q1 interpolant of a bilinear field is reproduced exactly at qps
    coords = UNIT_SQUARE * np.array([2.0, 3.0])
    b = element_basis("quad", coords)
    vals = 1.0 + 2 * coords[:, 0] + 3 * coords[:, 1] + 0.5 * coords[:, 0] * coords[:, 1]
    interp = b.shape @ vals
    x, y = b.qp_xy[:, 0], b.qp_xy[:, 1]
    assert np.allclose(interp, 1.0 + 2 * x + 3 * y + 0.5 * x * y)


def test_degenerate_element_rejected():
    bad = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(GeometryError):
        element_basis("tri", bad)
    inverted = UNIT_TRI[[0, 2, 1]]
    with pytest.raises(GeometryError):
        element_basis("tri", inverted)


def test_metric_unit_square():
    b = element_basis("quad", UNIT_SQUARE)
    g = metric_tensor(b, 0)
    assert np.allclose(g, [4.0, 0.0, 4.0])


def test_metric_scaling():
    b1 = element_basis("quad", UNIT_SQUARE)
    b2 = element_basis("quad", 2.0 * UNIT_SQUARE)
    assert np.allclose(metric_tensor(b2, 1), 0.25 * metric_tensor(b1, 1))


def test_metric_anisotropic_rectangle():
    # 2 x 1 rectangle: u.G.u = 4/len(u-direction)^2
    coords = UNIT_SQUARE * np.array([2.0, 1.0])
    b = element_basis("quad", coords)
    g = metric_tensor(b, 0)
    ex = np.array([1.0, 0.0])
    ey = np.array([0.0, 1.0])

    def quad_form(g, u):
        return g[0] * u[0] ** 2 + 2 * g[1] * u[0] * u[1] + g[2] * u[1] ** 2

    assert quad_form(g, ex) == pytest.approx(1.0)
    assert quad_form(g, ey) == pytest.approx(4.0)


def test_metric_directional_length_property():
    # sqrt(u.G.u) = 2 / (element length along u) for axis-aligned rectangles
    rng = np.random.default_rng(1)
    for _ in range(20):
        hx, hy = rng.uniform(0.1, 3.0, 2)
        coords = UNIT_SQUARE * np.array([hx, hy])
        g = metric_tensor(element_basis("quad", coords), 2)
        assert np.sqrt(g[0]) == pytest.approx(2.0 / hx)
        assert np.sqrt(g[2]) == pytest.approx(2.0 / hy)


def test_batched_matches_single():
    rng = np.random.default_rng(2)
    coords = np.stack(
        [UNIT_TRI + 0.05 * rng.standard_normal((3, 2)) for _ in range(7)]
    )
    batch = element_basis("tri", coords)
    for e in range(7):
        single = element_basis("tri", coords[e])
        assert np.allclose(batch.grad[e], single.grad)
        assert np.allclose(batch.wdet[e], single.wdet)


def test_mass_matrix_spd():
    rng = np.random.default_rng(3)
    for kind, ref in (("tri", UNIT_TRI), ("quad", UNIT_SQUARE)):
        coords = ref + 0.08 * rng.standard_normal(ref.shape)
        b = element_basis(kind, coords)
        m = np.einsum("q,qi,qj->ij", b.wdet, b.shape, b.shape)
        assert np.allclose(m, m.T)
        assert np.all(np.linalg.eigvalsh(m) > 0)
