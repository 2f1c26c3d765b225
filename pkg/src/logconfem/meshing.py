"""Meshes for the three benchmark geometries, plus a small text format.

All meshes are 2D with straight edges. Quadrilaterals and triangles are
stored counter-clockwise; boundary edges carry one symbolic tag each and
periodic meshes list (master, slave) node pairs with slaves mapping directly
to masters (no chains).
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .elements import NODES_PER_ELEMENT, element_basis
from .errors import ConfigError, GeometryError, MeshFormatError, MeshInvariantError

BOUNDARY_TAGS = (
    "Inflow",
    "Outflow",
    "Wall",
    "Cylinder",
    "Symmetry",
    "PeriodicX",
    "PeriodicY",
)


@dataclass
class Mesh:
    """Nodes, elements, tagged boundary edges and periodic node pairs."""

    nodes: np.ndarray            # (n_nodes, 2)
    elements: np.ndarray         # (n_el, 3|4), counter-clockwise
    element_kind: str            # "tri" | "quad"
    boundary_edges: np.ndarray   # (n_bedges, 2) node indices
    boundary_tags: list          # (n_bedges,) tag strings
    periodic_pairs: np.ndarray = field(
        default_factory=lambda: np.zeros((0, 2), dtype=int)
    )

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.elements = np.asarray(self.elements, dtype=int)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=int).reshape(-1, 2)
        self.boundary_tags = list(self.boundary_tags)
        self.periodic_pairs = np.asarray(self.periodic_pairs, dtype=int).reshape(-1, 2)
        self._cache = {}

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    def boundary_nodes(self, tag):
        """Sorted unique node indices of all edges carrying ``tag``."""
        key = ("bnodes", tag)
        if key not in self._cache:
            mask = [t == tag for t in self.boundary_tags]
            self._cache[key] = np.unique(self.boundary_edges[mask])
        return self._cache[key]

    def edges_with_tag(self, tag):
        mask = np.array([t == tag for t in self.boundary_tags], dtype=bool)
        return self.boundary_edges[mask]

    def edge_element(self):
        """Map each boundary edge (as a sorted node pair) to its element."""
        if "edge_element" not in self._cache:
            table = {}
            conn = self.elements
            nn = conn.shape[1]
            for e in range(len(conn)):
                for k in range(nn):
                    a, b = conn[e, k], conn[e, (k + 1) % nn]
                    table.setdefault((min(a, b), max(a, b)), []).append(e)
            self._cache["edge_element"] = table
        return self._cache["edge_element"]

    def signed_area(self):
        coords = self.nodes[self.elements]
        nn = coords.shape[1]
        total = 0.0
        for k in range(nn):
            a = coords[:, k]
            b = coords[:, (k + 1) % nn]
            total += 0.5 * np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1])
        return total

    def validate(self):
        """Check every structural invariant; raise MeshInvariantError on failure."""
        if not np.isfinite(self.nodes).all():
            raise MeshInvariantError("non-finite node coordinates")
        nn_expected = NODES_PER_ELEMENT[self.element_kind]
        if self.elements.shape[1] != nn_expected:
            raise MeshInvariantError(
                f"{self.element_kind} elements need {nn_expected} nodes per element"
            )
        if self.elements.min(initial=0) < 0 or self.elements.max(
            initial=-1
        ) >= self.n_nodes:
            raise MeshInvariantError("element node index out of range")
        try:
            element_basis(self.element_kind, self.nodes[self.elements])
        except GeometryError as exc:
            # recompute the offending element for the message
            text = str(exc)
            idx = int(text.rsplit("index", 1)[1].strip(" )")) if "index" in text else -1
            raise MeshInvariantError(
                "non-positive Jacobian determinant", element=idx
            ) from exc

        # boundary edges must each belong to exactly one element, and the
        # listed + tagged edges must cover the topological boundary once
        table = self.edge_element()
        topo_boundary = {k for k, v in table.items() if len(v) == 1}
        listed = [
            (min(int(a), int(b)), max(int(a), int(b)))
            for a, b in self.boundary_edges
        ]
        seen = set()
        for i, key in enumerate(listed):
            if key not in table:
                raise MeshInvariantError(f"boundary edge {key} is not a mesh edge")
            if len(table[key]) != 1:
                raise MeshInvariantError(
                    f"boundary edge {key} belongs to {len(table[key])} elements"
                )
            if key in seen:
                raise MeshInvariantError(f"boundary edge {key} tagged twice")
            seen.add(key)
        missing = topo_boundary - seen
        if missing:
            raise MeshInvariantError(
                f"{len(missing)} topological boundary edges are untagged"
            )
        for t in self.boundary_tags:
            if t not in BOUNDARY_TAGS:
                raise MeshInvariantError(f"unknown boundary tag {t!r}")

        # periodic pairing: bijective, no chains, lattice-consistent
        if len(self.periodic_pairs):
            masters = self.periodic_pairs[:, 0]
            slaves = self.periodic_pairs[:, 1]
            if len(np.unique(slaves)) != len(slaves):
                raise MeshInvariantError("a slave node is paired twice")
            if np.intersect1d(masters, slaves).size:
                raise MeshInvariantError("periodic pairing contains chains")
            extent = self.nodes.max(axis=0) - self.nodes.min(axis=0)
            diff = np.abs(self.nodes[slaves] - self.nodes[masters])
            for d in range(2):
                ok = (diff[:, d] < 1e-9 * max(1.0, extent[d])) | (
                    np.abs(diff[:, d] - extent[d]) < 1e-9 * max(1.0, extent[d])
                )
                if not ok.all():
                    raise MeshInvariantError(
                        "periodic pair offset is not a lattice translation"
                    )
        return self


# ----------------------------------------------------------------------------
# text format
# ----------------------------------------------------------------------------

def save_mesh(mesh, path):
    """Write the whitespace-delimited text format (see ``load_mesh``)."""
    buf = io.StringIO()
    buf.write(
        f"nodes {mesh.n_nodes} elements {mesh.n_elements} kind {mesh.element_kind}\n"
    )
    for x, y in mesh.nodes:
        buf.write(f"{x!r} {y!r}\n")
    for conn in mesh.elements:
        buf.write(" ".join(str(int(i)) for i in conn) + "\n")
    buf.write(f"boundary {len(mesh.boundary_edges)}\n")
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        buf.write(f"{int(a)} {int(b)} {tag}\n")
    if len(mesh.periodic_pairs):
        buf.write(f"periodic {len(mesh.periodic_pairs)}\n")
        for m, s in mesh.periodic_pairs:
            buf.write(f"{int(m)} {int(s)}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def _tokens(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def load_mesh(path):
    """Read a mesh from the text format and validate it.

    Format: header ``nodes N elements M kind tri|quad``; N coordinate lines
    ``x y``; M element lines of 3 or 4 zero-based node indices; a section
    ``boundary K`` with K lines ``a b TAG``; an optional section
    ``periodic P`` with P lines ``master slave``. ``#`` starts a comment.
    """
    stream = _tokens(path)

    def next_line(what):
        try:
            return next(stream)
        except StopIteration:
            raise MeshFormatError(f"unexpected end of file, expected {what}") from None

    lineno, head = next_line("header")
    if len(head) != 6 or head[0] != "nodes" or head[2] != "elements" or head[4] != "kind":
        raise MeshFormatError(
            "expected header 'nodes N elements M kind tri|quad'", line=lineno
        )
    try:
        n_nodes, n_elements = int(head[1]), int(head[3])
    except ValueError:
        raise MeshFormatError("node/element counts must be integers", line=lineno)
    kind = head[5]
    if kind not in NODES_PER_ELEMENT:
        raise MeshFormatError(f"unknown element kind {kind!r}", line=lineno)
    nn = NODES_PER_ELEMENT[kind]

    nodes = np.empty((n_nodes, 2))
    for i in range(n_nodes):
        lineno, tok = next_line(f"node {i}")
        if len(tok) != 2:
            raise MeshFormatError("expected 'x y'", line=lineno)
        try:
            nodes[i] = [float(tok[0]), float(tok[1])]
        except ValueError:
            raise MeshFormatError("bad coordinate", line=lineno)

    elements = np.empty((n_elements, nn), dtype=int)
    for i in range(n_elements):
        lineno, tok = next_line(f"element {i}")
        if len(tok) != nn:
            raise MeshFormatError(f"expected {nn} node indices", line=lineno)
        try:
            elements[i] = [int(t) for t in tok]
        except ValueError:
            raise MeshFormatError("bad node index", line=lineno)

    lineno, tok = next_line("'boundary K'")
    if len(tok) != 2 or tok[0] != "boundary":
        raise MeshFormatError("expected 'boundary K'", line=lineno)
    n_edges = int(tok[1])
    bedges = np.empty((n_edges, 2), dtype=int)
    btags = []
    for i in range(n_edges):
        lineno, tok = next_line(f"boundary edge {i}")
        if len(tok) != 3:
            raise MeshFormatError("expected 'a b TAG'", line=lineno)
        try:
            bedges[i] = [int(tok[0]), int(tok[1])]
        except ValueError:
            raise MeshFormatError("bad edge node index", line=lineno)
        if tok[2] not in BOUNDARY_TAGS:
            raise MeshFormatError(f"unknown boundary tag {tok[2]!r}", line=lineno)
        btags.append(tok[2])

    pairs = np.zeros((0, 2), dtype=int)
    trailing = list(stream)
    if trailing:
        lineno, tok = trailing[0]
        if len(tok) != 2 or tok[0] != "periodic":
            raise MeshFormatError("expected 'periodic P'", line=lineno)
        n_pairs = int(tok[1])
        if len(trailing) - 1 != n_pairs:
            raise MeshFormatError(
                f"expected {n_pairs} periodic pairs, found {len(trailing) - 1}",
                line=lineno,
            )
        pairs = np.empty((n_pairs, 2), dtype=int)
        for i, (lineno, tok) in enumerate(trailing[1:]):
            if len(tok) != 2:
                raise MeshFormatError("expected 'master slave'", line=lineno)
            pairs[i] = [int(tok[0]), int(tok[1])]

    mesh = Mesh(nodes, elements, kind, bedges, btags, pairs)
    return mesh.validate()


# ----------------------------------------------------------------------------
# graded 1D spacings
# ----------------------------------------------------------------------------

def _geometric_run(h0, ratio, h_max, budget):
    """Growing sizes h0, h0*ratio, ... capped at h_max, total <= budget."""
    sizes = []
    h, total = h0, 0.0
    while h < h_max and total + h <= budget:
        sizes.append(h)
        total += h
        h *= ratio
    return sizes, total


def graded_breaks(length, h0, ratio, h_max, h_end=None):
    """Breakpoints on [0, length], spacing h0 at 0 (and h_end at length).

    Geometric growth by ``ratio`` capped at ``h_max``; the middle is filled
    with near-uniform cells rescaled so the last break lands exactly on
    ``length``.
    """
    if ratio <= 1.0:
        raise ConfigError(f"grading ratio must exceed 1, got {ratio}")
    if length <= 0 or h0 <= 0:
        raise ConfigError("grading needs positive length and spacing")
    budget = 0.45 * length if h_end else 0.9 * length
    lo, lo_total = _geometric_run(h0, ratio, h_max, budget)
    hi, hi_total = ([], 0.0)
    if h_end:
        hi, hi_total = _geometric_run(h_end, ratio, h_max, budget)
    rem = length - lo_total - hi_total
    if rem < 0:
        scale = length / (lo_total + hi_total)
        sizes = [s * scale for s in lo] + [s * scale for s in reversed(hi)]
    else:
        n_mid = max(1, int(round(rem / h_max))) if rem > 1e-12 else 0
        mid = [rem / n_mid] * n_mid if n_mid else []
        sizes = lo + mid + list(reversed(hi))
    breaks = np.concatenate([[0.0], np.cumsum(sizes)])
    breaks[-1] = length
    return breaks


# ----------------------------------------------------------------------------
# four-roll periodic box
# ----------------------------------------------------------------------------

def gen_periodic_box(n_per_side, half_length):
    """Uniform quad mesh of [-L, L]^2 with fully periodic pairing.

    ``n_per_side**2`` elements; opposite edges collapse onto left/bottom
    masters and all four corners map to the single corner master, leaving
    ``n_per_side**2`` distinct coefficient-carrying nodes.
    """
    n = int(n_per_side)
    if n < 4:
        raise ConfigError(f"n_per_side must be >= 4, got {n_per_side}")
    L = float(half_length)
    coords_1d = np.linspace(-L, L, n + 1)

    def nid(i, j):
        return j * (n + 1) + i

    xs, ys = np.meshgrid(coords_1d, coords_1d, indexing="xy")
    nodes = np.column_stack([xs.ravel(), ys.ravel()])

    elements = np.empty((n * n, 4), dtype=int)
    k = 0
    for j in range(n):
        for i in range(n):
            elements[k] = [nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)]
            k += 1

    bedges, btags = [], []
    for i in range(n):
        bedges.append([nid(i, 0), nid(i + 1, 0)])
        btags.append("PeriodicY")
        bedges.append([nid(i, n), nid(i + 1, n)])
        btags.append("PeriodicY")
        bedges.append([nid(0, i), nid(0, i + 1)])
        btags.append("PeriodicX")
        bedges.append([nid(n, i), nid(n, i + 1)])
        btags.append("PeriodicX")

    pairs = []
    for j in range(1, n):
        pairs.append([nid(0, j), nid(n, j)])
    for i in range(1, n):
        pairs.append([nid(i, 0), nid(i, n)])
    for i, j in ((n, 0), (0, n), (n, n)):
        pairs.append([nid(0, 0), nid(i, j)])

    mesh = Mesh(nodes, elements, "quad", np.array(bedges), btags, np.array(pairs))
    return mesh.validate()


# ----------------------------------------------------------------------------
# 4:1 planar contraction (half domain, re-entrant corner at (0, -h2))
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionGrading:
    """Grading controls for the contraction mesh.

    The computed half-domain is the upstream channel ``[-upstream, 0] x
    [-4 h2, 0]`` joined to the downstream channel ``[0, downstream] x
    [-h2, 0]``; the symmetry line is y = 0.
    """

    corner_h: float = 0.04
    ratio: float = 1.2
    h2: float = 1.0
    upstream_length: float = 40.0
    downstream_length: float = 40.0
    max_dx: float = 1.0
    max_dy_upstream: float = 0.35
    max_dy_downstream: float = 0.16
    wall_h: float = 0.08

    def scaled(self):
        if self.h2 <= 0:
            raise ConfigError(f"h2 must be positive, got {self.h2}")
        if self.ratio <= 1.0:
            raise ConfigError(f"grading ratio must exceed 1, got {self.ratio}")
        if self.corner_h <= 0 or self.corner_h >= self.h2:
            raise ConfigError("corner_h must lie in (0, h2)")
        return self


def gen_contraction(grading=None):
    """Structured graded quad mesh of the 4:1 contraction half-domain."""
    g = (grading or ContractionGrading()).scaled()
    h2 = g.h2

    x_dn = graded_breaks(g.downstream_length, g.corner_h, g.ratio, g.max_dx)
    x_up = -graded_breaks(g.upstream_length, g.corner_h, g.ratio, g.max_dx)[::-1]
    y_dn = -h2 + graded_breaks(h2, g.corner_h, g.ratio, g.max_dy_downstream)
    y_up = (
        -4.0 * h2
        + graded_breaks(
            3.0 * h2, g.wall_h, g.ratio, g.max_dy_upstream, h_end=g.corner_h
        )
    )
    y_all = np.concatenate([y_up, y_dn[1:]])  # upstream column spans [-4 h2, 0]
    iy_corner = len(y_up) - 1  # index of y = -h2 in y_all

    nxu, nyu = len(x_up), len(y_all)
    nxd, nyd = len(x_dn), len(y_dn)

    up_id = np.arange(nxu * nyu).reshape(nxu, nyu)
    dn_id = np.empty((nxd, nyd), dtype=int)
    dn_id[0] = up_id[-1, iy_corner:]
    dn_id[1:] = nxu * nyu + np.arange((nxd - 1) * nyd).reshape(nxd - 1, nyd)

    nodes = np.empty((nxu * nyu + (nxd - 1) * nyd, 2))
    nodes[up_id.ravel(), 0] = np.repeat(x_up, nyu)
    nodes[up_id.ravel(), 1] = np.tile(y_all, nxu)
    nodes[dn_id[1:].ravel(), 0] = np.repeat(x_dn[1:], nyd)
    nodes[dn_id[1:].ravel(), 1] = np.tile(y_dn, nxd - 1)

    elements = []
    for i in range(nxu - 1):
        for j in range(nyu - 1):
            elements.append(
                [up_id[i, j], up_id[i + 1, j], up_id[i + 1, j + 1], up_id[i, j + 1]]
            )
    for i in range(nxd - 1):
        for j in range(nyd - 1):
            elements.append(
                [dn_id[i, j], dn_id[i + 1, j], dn_id[i + 1, j + 1], dn_id[i, j + 1]]
            )

    bedges, btags = [], []
    for i in range(nxu - 1):  # upstream wall y = -4 h2 and symmetry y = 0
        bedges.append([up_id[i, 0], up_id[i + 1, 0]])
        btags.append("Wall")
        bedges.append([up_id[i, -1], up_id[i + 1, -1]])
        btags.append("Symmetry")
    for j in range(nyu - 1):  # inflow
        bedges.append([up_id[0, j], up_id[0, j + 1]])
        btags.append("Inflow")
    for j in range(iy_corner):  # contraction-plane wall x = 0, y in [-4 h2, -h2]
        bedges.append([up_id[-1, j], up_id[-1, j + 1]])
        btags.append("Wall")
    for i in range(nxd - 1):  # downstream wall y = -h2 and symmetry
        bedges.append([dn_id[i, 0], dn_id[i + 1, 0]])
        btags.append("Wall")
        bedges.append([dn_id[i, -1], dn_id[i + 1, -1]])
        btags.append("Symmetry")
    for j in range(nyd - 1):  # outflow
        bedges.append([dn_id[-1, j], dn_id[-1, j + 1]])
        btags.append("Outflow")

    mesh = Mesh(nodes, np.array(elements), "quad", np.array(bedges), btags)
    return mesh.validate()


# ----------------------------------------------------------------------------
# cylinder in a channel (half domain, conformally fitted C-grid)
# ----------------------------------------------------------------------------

def _circle_plane_map(w, radius):
    """Inverse of w = z + R^2/z restricted to |z| >= R, Im z >= 0."""
    w = np.asarray(w, dtype=complex)
    root = np.sqrt(w * w - 4.0 * radius * radius)
    z1 = 0.5 * (w + root)
    z2 = 0.5 * (w - root)
    return np.where(np.abs(z1) >= np.abs(z2), z1, z2)


@dataclass(frozen=True)
class CylinderGrading:
    """Controls for the cylinder-channel mesh (radius 1, half-height 2)."""

    radius: float = 1.0
    height: float = 2.0
    upstream_length: float = 15.0
    downstream_length: float = 15.0
    n_arc: int = 96
    sym_ratio: float = 1.3
    sym_h_max: float = 1.3
    first_layer: float = 0.02
    layer_ratio: float = 1.02


def gen_cylinder_channel(refinement=0, grading=None):
    """Triangle mesh of the half channel around a cylinder.

    A C-grid is built in the plane of ``w = z + R^2/z``, where the half
    cylinder flattens onto the real axis, so grid columns leave the cylinder
    near-orthogonally; rows are then placed at prescribed physical heights by
    inverting the map. Quads are split into triangles with alternating
    diagonals. Node count grows ~4x per refinement level; the smallest
    cylinder-edge length is the uniform arc spacing pi*R/n_arc.
    """
    g = grading or CylinderGrading()
    scale = 2 ** int(refinement)
    R, H = g.radius, g.height
    n_arc = g.n_arc * scale
    arc_h = np.pi * R / n_arc

    sym_ratio = g.sym_ratio ** (1.0 / scale)
    x_dn = R + graded_breaks(
        g.downstream_length - R, arc_h, sym_ratio, g.sym_h_max / scale
    )
    x_up = -(R + graded_breaks(
        g.upstream_length - R, arc_h, sym_ratio, g.sym_h_max / scale
    ))[::-1]

    # bottom path: upstream symmetry, cylinder arc (theta from pi to 0),
    # downstream symmetry; xi is the image abscissa under the flattening map
    theta = np.linspace(np.pi, 0.0, n_arc + 1)
    bottom_x = np.concatenate([x_up[:-1], R * np.cos(theta), x_dn[1:]])
    bottom_y = np.concatenate(
        [np.zeros(len(x_up) - 1), R * np.sin(theta), np.zeros(len(x_dn) - 1)]
    )
    on_arc = np.zeros(len(bottom_x), dtype=bool)
    on_arc[len(x_up) - 1 : len(x_up) - 1 + n_arc + 1] = True
    xi = np.empty(len(bottom_x))
    xi[on_arc] = 2.0 * bottom_x[on_arc]  # w = 2 R cos(theta) on the arc
    xi[~on_arc] = bottom_x[~on_arc] + R * R / bottom_x[~on_arc]

    # normalized row fractions, geometric from the bottom (0 itself is the
    # bottom path and is prepended separately)
    t_ratio = g.layer_ratio ** (1.0 / scale)
    t = graded_breaks(1.0, g.first_layer / scale, t_ratio, 1.0)[1:]

    n_cols = len(bottom_x)
    y_target = bottom_y[:, None] + t[None, :] * (H - bottom_y[:, None])
    assert y_target.shape == (n_cols, len(t))

    # solve Im z(xi + i eta) = y_target by bisection, vectorized over nodes
    lo = np.zeros_like(y_target)
    hi = np.full_like(y_target, 2.0 * H + 1.0)
    xi_grid = np.broadcast_to(xi[:, None], y_target.shape)
    for _ in range(55):
        mid = 0.5 * (lo + hi)
        im = _circle_plane_map(xi_grid + 1j * mid, R).imag
        high = im > y_target
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
    eta = 0.5 * (lo + hi)
    z = _circle_plane_map(xi_grid + 1j * eta, R)
    x_grid = z.real
    y_grid = y_target.copy()

    # bottom row exactly on the path, top row exactly on the wall
    x_grid = np.concatenate([bottom_x[:, None], x_grid], axis=1)
    y_grid = np.concatenate([bottom_y[:, None], y_grid], axis=1)
    y_grid[:, -1] = H
    # vertical inlet/outlet columns
    x_grid[0, :] = bottom_x[0]
    x_grid[-1, :] = bottom_x[-1]
    n_rows = x_grid.shape[1]

    node_id = np.arange(n_cols * n_rows).reshape(n_cols, n_rows)
    nodes = np.column_stack([x_grid.ravel(), y_grid.ravel()])

    tris = []
    for i in range(n_cols - 1):
        for j in range(n_rows - 1):
            a = node_id[i, j]
            b = node_id[i + 1, j]
            c = node_id[i + 1, j + 1]
            d = node_id[i, j + 1]
            if (i + j) % 2 == 0:
                tris.append([a, b, c])
                tris.append([a, c, d])
            else:
                tris.append([a, b, d])
                tris.append([b, c, d])

    bedges, btags = [], []
    for i in range(n_cols - 1):
        tag = "Cylinder" if (on_arc[i] and on_arc[i + 1]) else "Symmetry"
        bedges.append([node_id[i, 0], node_id[i + 1, 0]])
        btags.append(tag)
        bedges.append([node_id[i, -1], node_id[i + 1, -1]])
        btags.append("Wall")
    for j in range(n_rows - 1):
        bedges.append([node_id[0, j], node_id[0, j + 1]])
        btags.append("Inflow")
        bedges.append([node_id[-1, j], node_id[-1, j + 1]])
        btags.append("Outflow")

    mesh = Mesh(nodes, np.array(tris), "tri", np.array(bedges), btags)
    return mesh.validate()
