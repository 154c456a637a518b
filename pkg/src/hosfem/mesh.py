"""Hexahedral elements, structured box meshes, and the local/global map.

Index conventions used everywhere in this package:

* Element-local nodes: an element of order N has n1 = N + 1 points per
  direction; node (i, j, k) is flat entry i + j*n1 + k*n1**2.  A flat
  (n1**3,) vector therefore reshapes to a (n1, n1, n1) cube indexed
  [k, j, i] with i fastest.
* Vertices: vertex b of a hexahedron sits at the reference corner given by
  the bits of b (bit 0 -> r, bit 1 -> s, bit 2 -> t, bit set means +1):
  v0 = (-1,-1,-1), v1 = (+1,-1,-1), v2 = (-1,+1,-1), v3 = (+1,+1,-1),
  v4 = (-1,-1,+1), ..., v7 = (+1,+1,+1).  The trilinear shape functions
  and the tensor-product map below agree under this ordering.
* Global nodes of a box mesh live on an integer lattice of shape
  (ex*N + 1, ey*N + 1, ez*N + 1), x fastest, so shared faces coalesce by
  construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ElementKind",
    "Element",
    "LocalField",
    "Mesh",
    "REFERENCE_CUBE",
    "trilinear_shape",
    "map_point",
    "parallelepiped_defect",
    "make_element",
    "element_node_coords",
    "mesh_local_coords",
    "box_mesh",
    "gather",
    "scatter_add",
    "boundary_node_mask",
    "save_mesh",
    "load_mesh",
]

REFERENCE_CUBE = np.array(
    [
        [-1.0, -1.0, -1.0],
        [+1.0, -1.0, -1.0],
        [-1.0, +1.0, -1.0],
        [+1.0, +1.0, -1.0],
        [-1.0, -1.0, +1.0],
        [+1.0, -1.0, +1.0],
        [-1.0, +1.0, +1.0],
        [+1.0, +1.0, +1.0],
    ]
)
REFERENCE_CUBE.flags.writeable = False


class ElementKind(enum.Enum):
    GENERAL = "general"
    TRILINEAR = "trilinear"
    PARALLELEPIPED = "parallelepiped"


@dataclass(frozen=True)
class Element:
    """One hexahedral element: 8 vertices plus the shape classification."""

    vertices: np.ndarray
    kind: ElementKind

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (8, 3):
            raise ValueError("element vertices must form an (8, 3) array")
        object.__setattr__(self, "vertices", v)


def parallelepiped_defect(vertices: np.ndarray) -> float:
    """Max deviation from the affine vertex identities of a parallelepiped.

    For a parallelepiped v3 = v1 + v2 - v0, v5 = v1 + v4 - v0,
    v6 = v2 + v4 - v0 and v7 = v1 + v2 + v4 - 2 v0 hold exactly.
    """
    v = np.asarray(vertices, dtype=float)
    preds = (
        (3, v[1] + v[2] - v[0]),
        (5, v[1] + v[4] - v[0]),
        (6, v[2] + v[4] - v[0]),
        (7, v[1] + v[2] + v[4] - 2.0 * v[0]),
    )
    return max(float(np.max(np.abs(v[i] - p))) for i, p in preds)


def make_element(vertices: np.ndarray, tol: float = 1e-12) -> Element:
    """Build an element, classifying it as parallelepiped or trilinear.

    The check is relative to the largest coordinate magnitude.
    """
    v = np.asarray(vertices, dtype=float)
    if v.shape != (8, 3):
        raise ValueError("an element needs 8 vertices with 3 coordinates each")
    scale = max(1.0, float(np.max(np.abs(v))))
    kind = ElementKind.PARALLELEPIPED if parallelepiped_defect(v) <= tol * scale else ElementKind.TRILINEAR
    return Element(vertices=v, kind=kind)


def trilinear_shape(vertex: int, r: float, s: float, t: float) -> float:
    """Trilinear shape function of one vertex at a reference point."""
    if not 0 <= vertex < 8:
        raise ValueError("vertex index must be in 0..7")
    fr = 1.0 + r if vertex & 1 else 1.0 - r
    fs = 1.0 + s if vertex & 2 else 1.0 - s
    ft = 1.0 + t if vertex & 4 else 1.0 - t
    return 0.125 * fr * fs * ft


def _blend(u: float) -> np.ndarray:
    return np.array([1.0 - u, 1.0 + u])


def map_point(vertices: np.ndarray, r: float, s: float, t: float) -> np.ndarray:
    """Image of a reference point under the trilinear map of the element."""
    weights = 0.125 * np.einsum("t,s,r->tsr", _blend(t), _blend(s), _blend(r)).ravel()
    return weights @ np.asarray(vertices, dtype=float)


def element_node_coords(element: Element, basis) -> np.ndarray:
    """Physical coordinates of all tensor GLL nodes, shape (n1**3, 3)."""
    xi = basis.points
    b = np.stack([1.0 - xi, 1.0 + xi], axis=1)  # (n1, 2)
    # node [k, j, i], vertex bits (c, b, a) with flat vertex index a + 2b + 4c
    blend = 0.125 * np.einsum("kc,jb,ia->kjicba", b, b, b)
    n1 = len(xi)
    return blend.reshape(n1**3, 8) @ element.vertices


@dataclass
class LocalField:
    """Element-local nodal data of shape (E, n1**3, n_col)."""

    data: np.ndarray
    order: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim == 2:
            self.data = self.data[:, :, None]
        if self.data.ndim != 3:
            raise ValueError("local field data must have shape (E, n1**3, n_col)")
        n3 = (self.order + 1) ** 3
        if self.data.shape[1] != n3:
            raise ValueError(f"expected {n3} nodes per element, got {self.data.shape[1]}")

    @property
    def n_elements(self) -> int:
        return self.data.shape[0]

    @property
    def n_col(self) -> int:
        return self.data.shape[2]

    @property
    def n1(self) -> int:
        return self.order + 1

    @classmethod
    def zeros(cls, n_elements: int, order: int, n_col: int = 1) -> "LocalField":
        return cls(np.zeros((n_elements, (order + 1) ** 3, n_col)), order)

    def cube(self, e: int, col: int = 0) -> np.ndarray:
        """One element's column as a (n1, n1, n1) cube view, indexed [k, j, i]."""
        n1 = self.n1
        return self.data[e, :, col].reshape(n1, n1, n1)


def mesh_local_coords(mesh: "Mesh", basis) -> LocalField:
    """Nodal coordinates of every element as a 3-column local field."""
    coords = np.stack([element_node_coords(el, basis) for el in mesh.elements])
    return LocalField(coords, mesh.order)


@dataclass(frozen=True)
class Mesh:
    """A conforming hexahedral mesh plus its local-to-global node map."""

    elements: tuple
    order: int
    local_to_global: np.ndarray
    global_node_count: int
    lattice_shape: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        l2g = np.asarray(self.local_to_global, dtype=np.int64)
        n3 = (self.order + 1) ** 3
        if l2g.shape != (len(self.elements), n3):
            raise ValueError("local_to_global must have shape (E, n1**3)")
        if l2g.min(initial=0) < 0 or (l2g.size and l2g.max() >= self.global_node_count):
            raise ValueError("local_to_global entries out of range")
        object.__setattr__(self, "local_to_global", l2g)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def multiplicity(self) -> np.ndarray:
        """How many element-local nodes map onto each global node."""
        return np.bincount(self.local_to_global.ravel(), minlength=self.global_node_count)


def box_mesh(
    ex: int,
    ey: int,
    ez: int,
    order: int,
    extents=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
    perturbation: float = 0.0,
    seed: int = 0,
) -> Mesh:
    """Structured box of ex * ey * ez hexahedra of the given order.

    perturbation jitters the interior element-corner vertices by up to that
    fraction of the per-axis element size (shared corners move together, so
    the mesh stays conforming); vertices on the domain boundary stay fixed.
    Values of 0.5 or more are rejected because they can invert elements.
    """
    if min(ex, ey, ez) < 1:
        raise ValueError("element counts must be at least 1")
    if order < 1:
        raise ValueError("order must be at least 1")
    if not 0.0 <= perturbation:
        raise ValueError("perturbation must be nonnegative")
    if perturbation >= 0.5:
        raise ValueError("perturbation must be below 0.5 (inverted-element risk)")

    counts = (ex, ey, ez)
    lows = [float(lo) for lo, _ in extents]
    span = [(float(hi) - float(lo)) for lo, hi in extents]
    axes = [lows[d] + span[d] * np.arange(counts[d] + 1) / counts[d] for d in range(3)]
    corners = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)  # [cx, cy, cz, 3]

    if perturbation > 0.0:
        rng = np.random.default_rng(seed)
        h = np.array([span[d] / counts[d] for d in range(3)])
        jitter = rng.uniform(-1.0, 1.0, corners.shape) * (perturbation * h)
        interior = np.zeros(corners.shape[:3], dtype=bool)
        interior[1:-1, 1:-1, 1:-1] = True
        corners = corners + jitter * interior[..., None]

    n1 = order + 1
    nx, ny, nz = ex * order + 1, ey * order + 1, ez * order + 1
    li = np.arange(n1)
    kk, jj, ii = np.meshgrid(li, li, li, indexing="ij")

    elements = []
    l2g = np.empty((ex * ey * ez, n1**3), dtype=np.int64)
    e = 0
    for cz in range(ez):
        for cy in range(ey):
            for cx in range(ex):
                verts = np.array(
                    [
                        corners[cx + (b & 1), cy + ((b >> 1) & 1), cz + ((b >> 2) & 1)]
                        for b in range(8)
                    ]
                )
                elements.append(make_element(verts))
                gx = cx * order + ii
                gy = cy * order + jj
                gz = cz * order + kk
                l2g[e] = ((gz * ny + gy) * nx + gx).ravel()
                e += 1

    return Mesh(
        elements=tuple(elements),
        order=order,
        local_to_global=l2g,
        global_node_count=nx * ny * nz,
        lattice_shape=(nx, ny, nz),
    )


def gather(global_values: np.ndarray, mesh: Mesh) -> LocalField:
    """Copy global DOFs into element-local storage (the Q action)."""
    g = np.asarray(global_values, dtype=float)
    squeeze = g.ndim == 1
    if squeeze:
        g = g[:, None]
    if g.shape[0] != mesh.global_node_count:
        raise ValueError("global vector length does not match the mesh")
    return LocalField(g[mesh.local_to_global], mesh.order)


def scatter_add(local: LocalField, mesh: Mesh) -> np.ndarray:
    """Sum element-local values into global storage (the Q^T action).

    Contributions accumulate in ascending (element, local node) order, which
    makes repeated runs bitwise identical.  Returns (n_global,) for a single
    column, else (n_global, n_col).
    """
    if local.n_elements != mesh.n_elements or local.order != mesh.order:
        raise ValueError("local field does not match the mesh")
    idx = mesh.local_to_global.ravel()
    ncol = local.n_col
    out = np.empty((mesh.global_node_count, ncol))
    for c in range(ncol):
        out[:, c] = np.bincount(
            idx, weights=local.data[:, :, c].ravel(), minlength=mesh.global_node_count
        )
    return out[:, 0] if ncol == 1 else out


def boundary_node_mask(mesh: Mesh) -> np.ndarray:
    """Boolean mask of global nodes on the box boundary (True = boundary).

    Needs the structured lattice shape, so it only works for box meshes.
    """
    if mesh.lattice_shape is None:
        raise ValueError("boundary mask needs a structured box mesh")
    nx, ny, nz = mesh.lattice_shape
    g = np.arange(mesh.global_node_count)
    gx = g % nx
    gy = (g // nx) % ny
    gz = g // (nx * ny)
    return (
        (gx == 0)
        | (gx == nx - 1)
        | (gy == 0)
        | (gy == ny - 1)
        | (gz == 0)
        | (gz == nz - 1)
    )


class MeshFormatError(ValueError):
    pass


def save_mesh(mesh: Mesh, path) -> None:
    """Write the mesh in the plain-text format read back by load_mesh."""
    lines = ["hosfem-mesh v1", f"order {mesh.order}", f"elements {mesh.n_elements}", f"nodes {mesh.global_node_count}"]
    if mesh.lattice_shape is not None:
        lines.append("lattice {} {} {}".format(*mesh.lattice_shape))
    for e, el in enumerate(mesh.elements):
        lines.append(f"element {e} {el.kind.value}")
        for v in el.vertices:
            lines.append(" ".join(repr(float(c)) for c in v))
    lines.append("connectivity")
    for e in range(mesh.n_elements):
        lines.append(" ".join(str(int(i)) for i in mesh.local_to_global[e]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    """Parse a mesh written by save_mesh."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    it = iter(raw)
    if next(it, None) != "hosfem-mesh v1":
        raise MeshFormatError("not a hosfem mesh file")

    def expect(key):
        line = next(it, "")
        parts = line.split()
        if not parts or parts[0] != key:
            raise MeshFormatError(f"expected '{key}' line, got {line!r}")
        return parts[1:]

    order = int(expect("order")[0])
    n_elements = int(expect("elements")[0])
    n_nodes = int(expect("nodes")[0])
    lattice = None
    line = next(it, "")
    if line.startswith("lattice"):
        lattice = tuple(int(v) for v in line.split()[1:4])
        line = next(it, "")

    elements = []
    pending = line
    for e in range(n_elements):
        head = pending.split()
        pending = None
        if len(head) != 3 or head[0] != "element" or int(head[1]) != e:
            raise MeshFormatError(f"malformed element header for element {e}")
        kind = ElementKind(head[2])
        verts = np.array([[float(v) for v in next(it).split()] for _ in range(8)])
        elements.append(Element(vertices=verts, kind=kind))
        pending = next(it, "")
    if pending != "connectivity":
        raise MeshFormatError("missing connectivity section")
    l2g = np.array([[int(v) for v in next(it).split()] for _ in range(n_elements)], dtype=np.int64)
    return Mesh(
        elements=tuple(elements),
        order=order,
        local_to_global=l2g,
        global_node_count=n_nodes,
        lattice_shape=lattice,
    )
