"""First-order elements (P1 triangles, Q1 quadrilaterals) and quadrature.

``element_basis`` evaluates shape functions, physical gradients, quadrature
weights and the geometric quantities needed by the stabilization parameters,
batched over any number of elements at once: ``coords`` may be ``(nn, 2)``
for a single element or ``(n_el, nn, 2)`` for a whole mesh.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

# 3-point, degree-2 rule on the reference triangle (0,0)-(1,0)-(0,1)
_TRI_QP = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
_TRI_W = np.array([1 / 6, 1 / 6, 1 / 6])

# 2x2 Gauss rule on the reference square [-1, 1]^2
_G = 1.0 / np.sqrt(3.0)
_QUAD_QP = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])
_QUAD_W = np.array([1.0, 1.0, 1.0, 1.0])

NODES_PER_ELEMENT = {"tri": 3, "quad": 4}


def _tri_shape(qp):
    xi, eta = qp[:, 0], qp[:, 1]
    n = np.stack([1.0 - xi - eta, xi, eta], axis=1)
    dn = np.broadcast_to(
        np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]), (len(qp), 3, 2)
    ).copy()
    return n, dn


def _quad_shape(qp):
    xi, eta = qp[:, 0], qp[:, 1]
    n = 0.25 * np.stack(
        [
            (1 - xi) * (1 - eta),
            (1 + xi) * (1 - eta),
            (1 + xi) * (1 + eta),
            (1 - xi) * (1 + eta),
        ],
        axis=1,
    )
    dn = np.empty((len(qp), 4, 2))
    dn[:, 0, 0] = -0.25 * (1 - eta)
    dn[:, 1, 0] = 0.25 * (1 - eta)
    dn[:, 2, 0] = 0.25 * (1 + eta)
    dn[:, 3, 0] = -0.25 * (1 + eta)
    dn[:, 0, 1] = -0.25 * (1 - xi)
    dn[:, 1, 1] = -0.25 * (1 + xi)
    dn[:, 2, 1] = 0.25 * (1 + xi)
    dn[:, 3, 1] = 0.25 * (1 - xi)
    return n, dn


def reference_rule(kind):
    """Quadrature points/weights and reference shape data for a kind."""
    if kind == "tri":
        n, dn = _tri_shape(_TRI_QP)
        return _TRI_QP, _TRI_W, n, dn
    if kind == "quad":
        n, dn = _quad_shape(_QUAD_QP)
        return _QUAD_QP, _QUAD_W, n, dn
    raise ValueError(f"unknown element kind {kind!r}")


@dataclass
class ElementBasis:
    """Shape data at the quadrature points of one or many elements.

    Arrays broadcast over a leading element axis when ``coords`` was batched:
    ``shape`` is (n_qp, nn); ``grad`` is (..., n_qp, nn, 2) in physical
    coordinates; ``wdet`` is the quadrature weight times |det J|;
    ``jac_inv`` holds d(xi)/d(x); ``qp_xy`` the physical quadrature points.
    """

    kind: str
    shape: np.ndarray
    grad: np.ndarray
    wdet: np.ndarray
    jac: np.ndarray
    jac_inv: np.ndarray
    det: np.ndarray
    qp_xy: np.ndarray
    weights: np.ndarray

    @property
    def n_qp(self):
        return self.shape.shape[0]

    @property
    def n_nodes(self):
        return self.shape.shape[1]


def element_basis(kind, coords):
    """Evaluate the P1/Q1 basis on (batched) element coordinates.

    Raises :class:`GeometryError` if any Jacobian determinant is not
    strictly positive (degenerate or inverted element).
    """
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 2
    if single:
        coords = coords[None]
    qp, w, n, dn = reference_rule(kind)
    if coords.shape[-2] != n.shape[1]:
        raise ValueError(
            f"{kind} element needs {n.shape[1]} nodes, got {coords.shape[-2]}"
        )
    # J[e, q, k, l] = d x_k / d xi_l
    jac = np.einsum("enk,qnl->eqkl", coords, dn)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    if not np.all(det > 0.0):
        bad = int(np.argwhere(~(det > 0.0))[0][0])
        raise GeometryError(
            f"non-positive Jacobian determinant (element index {bad})"
        )
    inv = np.empty_like(jac)
    inv[..., 0, 0] = jac[..., 1, 1] / det
    inv[..., 0, 1] = -jac[..., 0, 1] / det
    inv[..., 1, 0] = -jac[..., 1, 0] / det
    inv[..., 1, 1] = jac[..., 0, 0] / det
    # physical gradients: dN/dx_i = dN/dxi_l * dxi_l/dx_i
    grad = np.einsum("qnl,eqli->eqni", dn, inv)
    wdet = w[None, :] * det
    qp_xy = np.einsum("qn,enk->eqk", n, coords)
    if single:
        jac, inv, det = jac[0], inv[0], det[0]
        grad, wdet, qp_xy = grad[0], wdet[0], qp_xy[0]
    return ElementBasis(
        kind=kind,
        shape=n,
        grad=grad,
        wdet=wdet,
        jac=jac,
        jac_inv=inv,
        det=det,
        qp_xy=qp_xy,
        weights=w,
    )


def metric_tensor(basis, qp=None):
    """Covariant metric G_ij = (dxi_k/dx_i)(dxi_k/dx_j) as (..., 3) sym.

    For an axis-aligned square of side h (reference side 2) this is
    ``(4/h^2) I``; its trace scales as 1/h^2, giving the directional
    element lengths used by the stabilization parameters.
    """
    inv = basis.jac_inv
    if qp is not None:
        inv = inv[..., qp, :, :]
    g = np.einsum("...ki,...kj->...ij", inv, inv)
    return np.stack([g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]], axis=-1)
