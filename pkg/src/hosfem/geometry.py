"""Geometric factors for hexahedral spectral elements.

Factor conventions
------------------
The weak Laplacian on one element needs, per quadrature node, the six
independent entries of the symmetric matrix

    G = w |J| J^{-1} J^{-T}

(named g00, g01, g02, g11, g12, g22) plus, for the mass term, the scalar
gwj = w |J|.  Here J is the Jacobian of the reference-to-physical map at
the node and w = w_i w_j w_k the tensor GLL weight.  A
:class:`GeometricFactorSet` with ``weighted=True`` stores exactly these
numbers; that is the canonical form every route below is compared in.

The trilinear fast path avoids divisions and 1/8 factors by working with a
rescaled Jacobian JT = 8 J whose entries are short integer-weighted sums of
vertex coordinates.  From K = JT^T JT it keeps the *unscaled* adjugate
entries adj(K) together with

    lam_geo = 0.125 * w / det(JT),      gwj_unscaled = det(JT)^2 / 64,

and the bridge back to the weighted convention is one multiply per entry:

    g_weighted  = lam_geo * g_unscaled,     gwj_weighted = lam_geo * gwj_unscaled.

(The identity behind it: |J| J^{-1} J^{-T} = adj(J^T J) / |J|, applied to JT
and rescaled.)  Both routes are cross-checked to rounding by the tests.

Jacobian orientation: entry [a][b] of every 3x3 Jacobian here is the
derivative of physical coordinate a with respect to reference direction b,
so columns correspond to d/dr, d/ds, d/dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mesh as meshmod
from .contractions import contract_r, contract_s, contract_t

__all__ = [
    "GeometryError",
    "GeometricFactorSet",
    "ParallelepipedFactors",
    "TrilinearCommonTerms",
    "common_terms",
    "trilinear_jacobian_analytic",
    "discrete_jacobians",
    "factors_from_jacobians",
    "jacobi_to_geo",
    "trilinear_factors",
    "recompute_trilinear",
    "parallelepiped_setup",
    "recompute_parallelepiped",
    "parallelepiped_factor_field",
    "merged_scalar_setup",
    "partial_recompute_setup",
]


class GeometryError(ValueError):
    pass


@dataclass
class GeometricFactorSet:
    """Per-node factors with any leading shape, plus the scaling convention.

    ``g`` holds the six symmetric entries in the order g00, g01, g02, g11,
    g12, g22 on its last axis.  In the unscaled convention ``lam_geo`` must
    be present and ``g``/``gwj`` are the raw adjugate quantities; multiply
    by ``lam_geo`` (see :meth:`to_weighted`) to reach the canonical form.
    ``gwj`` may be None when a path does not need the mass factor.
    """

    g: np.ndarray
    gwj: np.ndarray | None
    weighted: bool
    lam_geo: np.ndarray | None = None

    def __post_init__(self):
        if self.g.shape[-1] != 6:
            raise ValueError("factor array must have 6 entries on the last axis")

    def to_weighted(self) -> "GeometricFactorSet":
        if self.weighted:
            return self
        if self.lam_geo is None:
            raise ValueError("unscaled factors need lam_geo to reach the weighted form")
        gwj = None if self.gwj is None else self.lam_geo * self.gwj
        return GeometricFactorSet(
            g=self.lam_geo[..., None] * self.g, gwj=gwj, weighted=True
        )


@dataclass(frozen=True)
class ParallelepipedFactors:
    """Node-independent factor core of a parallelepiped element.

    h[0:6] are the weight-free entries of |J| J^{-1} J^{-T} (same ordering
    as GeometricFactorSet.g), h[6] is |J|.  Multiplying by the tensor weight
    of a node yields the weighted factors there.
    """

    h: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.h, dtype=float)
        if v.shape != (7,):
            raise ValueError("parallelepiped factors must have 7 entries")
        object.__setattr__(self, "h", v)


@dataclass(frozen=True)
class TrilinearCommonTerms:
    """Per-direction pieces of the rescaled trilinear Jacobian.

    The d/dr column of JT at node (i, j, k) equals
    ``dr_base[j] + t_k * dr_slope[j]`` (it depends on the s index only),
    the d/ds column equals ``ds_base[i] + t_k * ds_slope[i]``, and the
    d/dt column ``dt_col[j, i]`` carries no t dependence at all.  Leading
    axes batch over elements.
    """

    dr_base: np.ndarray
    dr_slope: np.ndarray
    ds_base: np.ndarray
    ds_slope: np.ndarray
    dt_col: np.ndarray


def common_terms(vertices: np.ndarray, points: np.ndarray) -> TrilinearCommonTerms:
    """Precompute the shared column terms for a batch of elements.

    vertices has shape (..., 8, 3); results gain a (n1,) node axis before
    the coordinate axis.
    """
    v = np.asarray(vertices, dtype=float)
    single = v.ndim == 2
    if single:
        v = v[None]
    xi = np.asarray(points, dtype=float)
    r0 = (1.0 - xi)[None, :, None]
    r1 = (1.0 + xi)[None, :, None]

    def d(a, b):
        return (v[:, a] - v[:, b])[:, None, :]

    tmp1 = r0 * d(1, 0) + r1 * d(3, 2)
    tmp2 = r0 * d(5, 4) + r1 * d(7, 6)
    tmp3 = r0 * d(2, 0) + r1 * d(3, 1)
    tmp4 = r0 * d(6, 4) + r1 * d(7, 5)

    a0 = 1.0 - xi
    a1 = 1.0 + xi
    w00 = np.einsum("j,i->ji", a0, a0)[None, :, :, None]
    w01 = np.einsum("j,i->ji", a0, a1)[None, :, :, None]
    w10 = np.einsum("j,i->ji", a1, a0)[None, :, :, None]
    w11 = np.einsum("j,i->ji", a1, a1)[None, :, :, None]

    def dv(a, b):
        return (v[:, a] - v[:, b])[:, None, None, :]

    dt_col = w00 * dv(4, 0) + w01 * dv(5, 1) + w11 * dv(7, 3) + w10 * dv(6, 2)

    terms = TrilinearCommonTerms(
        dr_base=tmp1 + tmp2,
        dr_slope=tmp2 - tmp1,
        ds_base=tmp3 + tmp4,
        ds_slope=tmp4 - tmp3,
        dt_col=dt_col,
    )
    if single:
        terms = TrilinearCommonTerms(
            dr_base=terms.dr_base[0],
            dr_slope=terms.dr_slope[0],
            ds_base=terms.ds_base[0],
            ds_slope=terms.ds_slope[0],
            dt_col=terms.dt_col[0],
        )
    return terms


def trilinear_jacobian_analytic(vertices: np.ndarray, r: float, s: float, t: float) -> np.ndarray:
    """Jacobian of the trilinear map at one reference point, closed form."""
    v = np.asarray(vertices, dtype=float)
    blend = lambda u: np.array([1.0 - u, 1.0 + u])  # noqa: E731
    edge = np.array([-1.0, 1.0])
    row_r = np.einsum("t,s,r->tsr", blend(t), blend(s), edge).ravel()
    row_s = np.einsum("t,s,r->tsr", blend(t), edge, blend(r)).ravel()
    row_t = np.einsum("t,s,r->tsr", edge, blend(s), blend(r)).ravel()
    rows = np.stack([row_r, row_s, row_t])
    return 0.125 * (rows @ v).T


def _trilinear_jacobians_unscaled(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Rescaled Jacobians JT = 8 J at every tensor node: (E, n1**3, 3, 3)."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 3:
        raise ValueError("expected a batch of vertex sets, shape (E, 8, 3)")
    terms = common_terms(v, points)
    xi = np.asarray(points, dtype=float)
    n1 = len(xi)
    n_el = v.shape[0]
    jac = np.empty((n_el, n1, n1, n1, 3, 3))
    t = xi[None, :, None, None, None]
    jac[..., 0] = terms.dr_base[:, None, :, None, :] + t * terms.dr_slope[:, None, :, None, :]
    jac[..., 1] = terms.ds_base[:, None, None, :, :] + t * terms.ds_slope[:, None, None, :, :]
    jac[..., 2] = np.broadcast_to(terms.dt_col[:, None, :, :, :], (n_el, n1, n1, n1, 3))
    return jac.reshape(n_el, n1**3, 3, 3)


def _det3(j: np.ndarray) -> np.ndarray:
    """Determinants of stacked 3x3 matrices by cofactor expansion."""
    return (
        j[..., 0, 0] * (j[..., 1, 1] * j[..., 2, 2] - j[..., 2, 1] * j[..., 1, 2])
        - j[..., 1, 0] * (j[..., 0, 1] * j[..., 2, 2] - j[..., 2, 1] * j[..., 0, 2])
        + j[..., 2, 0] * (j[..., 0, 1] * j[..., 1, 2] - j[..., 1, 1] * j[..., 0, 2])
    )


def discrete_jacobians(coords: meshmod.LocalField, basis) -> np.ndarray:
    """Setup-stage Jacobians from the discrete gradient of nodal coordinates.

    coords must carry the three physical coordinates as columns.  Returns
    (E, n1**3, 3, 3); raises if any node has a non-positive determinant.
    """
    if coords.n_col != 3:
        raise ValueError("coordinate field must have exactly 3 columns")
    d = basis.diff_matrix
    x = coords.data
    n_el, n3, _ = x.shape
    jac = np.empty((n_el, n3, 3, 3))
    for c in range(3):
        col = x[:, :, c]
        jac[:, :, c, 0] = contract_r(col, d)
        jac[:, :, c, 1] = contract_s(col, d)
        jac[:, :, c, 2] = contract_t(col, d)
    det = _det3(jac)
    if np.any(det <= 0.0):
        e, node = np.argwhere(det <= 0.0)[0]
        raise GeometryError(
            f"non-positive Jacobian determinant at element {e}, node {node}"
        )
    return jac


def factors_from_jacobians(jac: np.ndarray, basis) -> GeometricFactorSet:
    """Weighted factors straight from per-node Jacobians via dense inversion.

    This is the general-geometry setup route (and the reference the faster
    recomputation paths are tested against): w |J| J^{-1} J^{-T} and w |J|
    computed with np.linalg on each 3x3 block.
    """
    det = np.linalg.det(jac)
    if np.any(det <= 0.0):
        raise GeometryError("non-positive Jacobian determinant")
    inv = np.linalg.inv(jac)
    m = np.einsum("...ab,...cb->...ac", inv, inv)
    w = basis.tensor_weights()
    scale = w * det
    g = np.stack(
        [
            scale * m[..., 0, 0],
            scale * m[..., 0, 1],
            scale * m[..., 0, 2],
            scale * m[..., 1, 1],
            scale * m[..., 1, 2],
            scale * m[..., 2, 2],
        ],
        axis=-1,
    )
    return GeometricFactorSet(g=g, gwj=scale, weighted=True)


def jacobi_to_geo(j_unscaled: np.ndarray, w: float):
    """Unscaled factors from one rescaled Jacobian JT = 8 J.

    Returns (lam_geo, g00, g01, g02, g11, g12, g22, gwj) where the g
    entries are adj(JT^T JT), gwj = det(JT)^2 / 64 and
    lam_geo = 0.125 w / det(JT).
    """
    j = np.asarray(j_unscaled, dtype=float)
    if j.shape != (3, 3):
        raise ValueError("expected a single 3x3 Jacobian")
    jdet = float(_det3(j))
    if jdet == 0.0:
        raise GeometryError("singular Jacobian")
    k = j.T @ j
    lam_geo = 0.125 * w / jdet
    gwj = 0.015625 * jdet * jdet
    g00 = k[1, 1] * k[2, 2] - k[1, 2] * k[1, 2]
    g01 = k[0, 2] * k[1, 2] - k[0, 1] * k[2, 2]
    g02 = k[0, 1] * k[1, 2] - k[0, 2] * k[1, 1]
    g11 = k[0, 0] * k[2, 2] - k[0, 2] * k[0, 2]
    g12 = k[0, 1] * k[0, 2] - k[0, 0] * k[1, 2]
    g22 = k[0, 0] * k[1, 1] - k[0, 1] * k[0, 1]
    return lam_geo, g00, g01, g02, g11, g12, g22, gwj


def trilinear_factors(
    vertices: np.ndarray,
    basis,
    with_lam_geo: bool = True,
    with_gwj: bool = True,
    validate: bool = False,
) -> GeometricFactorSet:
    """Recompute unscaled factors at every node of a batch of elements.

    vertices has shape (E, 8, 3).  The flags mirror what the different
    kernel variants actually evaluate: the merged-scalar path skips both
    lam_geo and gwj, the partial path recomputes neither but needs the g
    entries only.  validate=True additionally rejects nodes with
    non-positive determinant (used once at operator setup).
    """
    jac = _trilinear_jacobians_unscaled(vertices, basis.points)
    c0 = jac[..., 0]
    c1 = jac[..., 1]
    c2 = jac[..., 2]
    k00 = (c0 * c0).sum(-1)
    k01 = (c0 * c1).sum(-1)
    k02 = (c0 * c2).sum(-1)
    k11 = (c1 * c1).sum(-1)
    k12 = (c1 * c2).sum(-1)
    k22 = (c2 * c2).sum(-1)
    g = np.stack(
        [
            k11 * k22 - k12 * k12,
            k02 * k12 - k01 * k22,
            k01 * k12 - k02 * k11,
            k00 * k22 - k02 * k02,
            k01 * k02 - k00 * k12,
            k00 * k11 - k01 * k01,
        ],
        axis=-1,
    )
    lam_geo = None
    gwj = None
    if with_lam_geo or with_gwj or validate:
        jdet = _det3(jac)
        if validate and np.any(jdet <= 0.0):
            e, node = np.argwhere(jdet <= 0.0)[0]
            raise GeometryError(f"degenerate element {e} (det <= 0 at node {node})")
        if with_gwj:
            gwj = 0.015625 * jdet * jdet
        if with_lam_geo:
            lam_geo = 0.125 * basis.tensor_weights()[None, :] / jdet
    return GeometricFactorSet(g=g, gwj=gwj, weighted=False, lam_geo=lam_geo)


def recompute_trilinear(vertices: np.ndarray, basis) -> GeometricFactorSet:
    """Unscaled factors plus lam_geo for one trilinear element, (n1**3, ...)."""
    batch = trilinear_factors(np.asarray(vertices, dtype=float)[None], basis, validate=True)
    return GeometricFactorSet(
        g=batch.g[0], gwj=batch.gwj[0], weighted=False, lam_geo=batch.lam_geo[0]
    )


def parallelepiped_setup(vertices: np.ndarray, tol: float = 1e-10) -> ParallelepipedFactors:
    """Constant factor core of a parallelepiped element.

    Rejects vertex sets that violate the parallelepiped identities beyond
    tol relative to the coordinate magnitude.
    """
    v = np.asarray(vertices, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))))
    if meshmod.parallelepiped_defect(v) > tol * scale:
        raise GeometryError("vertices do not form a parallelepiped")
    jac = 0.5 * np.stack([v[1] - v[0], v[2] - v[0], v[4] - v[0]], axis=1)
    det = float(np.linalg.det(jac))
    if det <= 0.0:
        raise GeometryError("degenerate parallelepiped (det <= 0)")
    inv = np.linalg.inv(jac)
    m = det * inv @ inv.T
    return ParallelepipedFactors(
        h=np.array([m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2], det])
    )


def recompute_parallelepiped(factors: ParallelepipedFactors, basis, i: int, j: int, k: int) -> np.ndarray:
    """Weighted factors at node (i, j, k): the tensor weight times h."""
    w = basis.weights
    return (w[i] * w[j] * w[k]) * factors.h


def parallelepiped_factor_field(h_batch: np.ndarray, basis) -> GeometricFactorSet:
    """Weighted factors at all nodes for a batch of parallelepipeds.

    h_batch has shape (E, 7) of :class:`ParallelepipedFactors` rows.
    """
    h = np.asarray(h_batch, dtype=float)
    w = basis.tensor_weights()
    g = w[None, :, None] * h[:, None, :6]
    gwj = w[None, :] * h[:, None, 6]
    return GeometricFactorSet(g=g, gwj=gwj, weighted=True)


def merged_scalar_setup(lam0, lam1, lam_geo: np.ndarray, gwj_weighted: np.ndarray):
    """Fold the model coefficients into the geometry at setup time.

    Returns (lam2, lam3) with lam2 = lam_geo * lam0 and
    lam3 = gwj_weighted * lam1, so the apply stage needs neither the
    division for lam_geo nor the gwj evaluation.  gwj_weighted must be the
    weighted mass factor w |J|.
    """
    lam0 = np.asarray(lam0, dtype=float)
    lam1 = np.asarray(lam1, dtype=float)
    return lam_geo * lam0, gwj_weighted * lam1


def partial_recompute_setup(vertices: np.ndarray, basis) -> np.ndarray:
    """Per-node lam_geo for the stored-scalar partial recomputation path.

    Only the division-bearing scalar is kept; the g entries are recomputed
    on the fly at apply time.
    """
    jac = _trilinear_jacobians_unscaled(np.asarray(vertices, dtype=float), basis.points)
    jdet = _det3(jac)
    if np.any(jdet <= 0.0):
        raise GeometryError("degenerate element (det <= 0)")
    return 0.125 * basis.tensor_weights()[None, :] / jdet
