"""Matrix-free element-local operator application.

One apply evaluates, per element and per field column,

    forward contractions   x0, x1, x2 = (d/dr, d/ds, d/dt) X
    nodewise factor stage  (rr, ss, tt) = scale * G (x0, x1, x2)
    transposed contractions plus, for Helmholtz, the weighted mass term
                           Y = Dr^T rr + Ds^T ss + Dt^T tt  [+ mass * X]

without ever forming the n1**3 x n1**3 element matrix.  Where the factor
data comes from is the variant axis of this package: loaded from setup
storage, recomputed per node from the 8 element vertices (optionally with
coefficients merged at setup, or with only the division-bearing scalar
stored), or expanded from the 7 constants of a parallelepiped.

The Poisson operator hard-codes lam0 = 1 and has no mass term; coefficient
fields exist only for Helmholtz.  For 3-column fields the factor stage is
hoisted: factors are fetched or recomputed once per element and reused by
all columns.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry
from .basis import SpectralBasis
from .contractions import contract_r, contract_s, contract_t, gradient_matrices
from .mesh import Element, ElementKind, LocalField, element_node_coords

__all__ = [
    "Equation",
    "FactorSource",
    "KernelSpec",
    "LocalOperator",
    "ax_local_apply",
    "dense_local_matrix",
]


class Equation(enum.Enum):
    POISSON = "poisson"
    HELMHOLTZ = "helmholtz"


class FactorSource(enum.Enum):
    STORED = "stored"
    TRILINEAR_RECOMPUTE = "trilinear"
    TRILINEAR_MERGED = "trilinear-merged"
    TRILINEAR_PARTIAL = "trilinear-partial"
    PARALLELEPIPED_RECOMPUTE = "parallelepiped"


@dataclass(frozen=True)
class KernelSpec:
    """What to apply: equation, columns, factor variant, polynomial order."""

    equation: Equation
    n_col: int
    factor_source: FactorSource
    order: int

    def __post_init__(self):
        if self.n_col not in (1, 3):
            raise ValueError("n_col must be 1 or 3")
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if (
            self.factor_source is FactorSource.TRILINEAR_MERGED
            and self.equation is not Equation.HELMHOLTZ
        ):
            raise ValueError("the merged-scalar variant exists for Helmholtz only")
        if (
            self.factor_source is FactorSource.TRILINEAR_PARTIAL
            and self.equation is not Equation.POISSON
        ):
            raise ValueError("the partial-recompute variant exists for Poisson only")

    @property
    def n1(self) -> int:
        return self.order + 1


def _coeff_field(value, n_elements: int, n3: int) -> np.ndarray:
    if value is None:
        return np.ones((n_elements, n3))
    if isinstance(value, LocalField):
        value = value.data[:, :, 0]
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full((n_elements, n3), float(arr))
    if arr.shape == (n3,):
        # one per-node profile shared by every element
        return np.broadcast_to(arr, (n_elements, n3))
    if arr.shape != (n_elements, n3):
        raise ValueError("coefficient field must be scalar or shaped (E, n1**3)")
    return arr


_TRILINEAR_KINDS = (ElementKind.TRILINEAR, ElementKind.PARALLELEPIPED)


class LocalOperator:
    """Batched Y = A X over a fixed element set, factors per KernelSpec.

    Setup validates the geometry (positive determinants) and prepares
    exactly the data the chosen variant keeps in memory; recompute variants
    rebuild their factors on every apply call.
    """

    def __init__(
        self,
        spec: KernelSpec,
        elements,
        basis: SpectralBasis,
        lam0=None,
        lam1=None,
    ):
        if basis.order != spec.order:
            raise ValueError("basis order does not match the kernel spec")
        elements = list(elements)
        if not elements:
            raise ValueError("need at least one element")
        self.spec = spec
        self.basis = basis
        self.n_elements = len(elements)
        n3 = basis.n1**3
        helm = spec.equation is Equation.HELMHOLTZ
        if not helm and (lam0 is not None or lam1 is not None):
            raise ValueError("coefficient fields apply to the Helmholtz operator only")

        source = spec.factor_source
        kinds = {el.kind for el in elements}
        self._verts = np.stack([el.vertices for el in elements])

        if source is FactorSource.PARALLELEPIPED_RECOMPUTE:
            if kinds - {ElementKind.PARALLELEPIPED}:
                raise ValueError("parallelepiped recompute needs an all-parallelepiped element set")
            self._h = np.stack([geometry.parallelepiped_setup(el.vertices).h for el in elements])
        elif source is FactorSource.STORED:
            coords = LocalField(
                np.stack([element_node_coords(el, basis) for el in elements]), spec.order
            )
            jac = geometry.discrete_jacobians(coords, basis)
            stored = geometry.factors_from_jacobians(jac, basis)
            self._g = stored.g
            self._gwj = stored.gwj
        else:
            if kinds - set(_TRILINEAR_KINDS):
                raise ValueError("trilinear recompute variants need trilinear elements")
            # one full evaluation up front to reject degenerate geometry
            full = geometry.trilinear_factors(self._verts, basis, validate=True)
            if source is FactorSource.TRILINEAR_PARTIAL:
                self._lam_geo = geometry.partial_recompute_setup(self._verts, basis)
            elif source is FactorSource.TRILINEAR_MERGED:
                lam0f = _coeff_field(lam0, self.n_elements, n3)
                lam1f = _coeff_field(lam1, self.n_elements, n3)
                gwj_weighted = full.lam_geo * full.gwj
                self._lam2, self._lam3 = geometry.merged_scalar_setup(
                    lam0f, lam1f, full.lam_geo, gwj_weighted
                )

        if helm and source is not FactorSource.TRILINEAR_MERGED:
            self._lam0 = _coeff_field(lam0, self.n_elements, n3)
            self._lam1 = _coeff_field(lam1, self.n_elements, n3)

    def _factor_stage(self, lo: int, hi: int):
        """Factor data for an element range: (g, grad_scale, mass_scale).

        g are the six gradient factors, grad_scale an optional per-node
        multiplier applied to the contracted stage (None means 1), and
        mass_scale the optional per-node mass coefficient.
        """
        spec = self.spec
        source = spec.factor_source
        helm = spec.equation is Equation.HELMHOLTZ
        if source is FactorSource.STORED:
            g = self._g[lo:hi]
            if not helm:
                return g, None, None
            return g, self._lam0[lo:hi], self._lam1[lo:hi] * self._gwj[lo:hi]
        if source is FactorSource.PARALLELEPIPED_RECOMPUTE:
            fs = geometry.parallelepiped_factor_field(self._h[lo:hi], self.basis)
            if not helm:
                return fs.g, None, None
            return fs.g, self._lam0[lo:hi], self._lam1[lo:hi] * fs.gwj
        if source is FactorSource.TRILINEAR_RECOMPUTE:
            fs = geometry.trilinear_factors(
                self._verts[lo:hi], self.basis, with_lam_geo=True, with_gwj=helm
            )
            if not helm:
                return fs.g, fs.lam_geo, None
            return (
                fs.g,
                self._lam0[lo:hi] * fs.lam_geo,
                self._lam1[lo:hi] * (fs.lam_geo * fs.gwj),
            )
        if source is FactorSource.TRILINEAR_MERGED:
            fs = geometry.trilinear_factors(
                self._verts[lo:hi], self.basis, with_lam_geo=False, with_gwj=False
            )
            return fs.g, self._lam2[lo:hi], self._lam3[lo:hi]
        # partial: stored lam_geo, g recomputed without the division
        fs = geometry.trilinear_factors(
            self._verts[lo:hi], self.basis, with_lam_geo=False, with_gwj=False
        )
        return fs.g, self._lam_geo[lo:hi], None

    def _apply_range(self, xdata: np.ndarray, ydata: np.ndarray, lo: int, hi: int) -> None:
        d = self.basis.diff_matrix
        g, grad_scale, mass_scale = self._factor_stage(lo, hi)
        for c in range(self.spec.n_col):
            x = xdata[lo:hi, :, c]
            x0 = contract_r(x, d)
            x1 = contract_s(x, d)
            x2 = contract_t(x, d)
            rr = g[..., 0] * x0 + g[..., 1] * x1 + g[..., 2] * x2
            ss = g[..., 1] * x0 + g[..., 3] * x1 + g[..., 4] * x2
            tt = g[..., 2] * x0 + g[..., 4] * x1 + g[..., 5] * x2
            if grad_scale is not None:
                rr *= grad_scale
                ss *= grad_scale
                tt *= grad_scale
            y = contract_r(rr, d, transpose=True)
            y += contract_s(ss, d, transpose=True)
            y += contract_t(tt, d, transpose=True)
            if mass_scale is not None:
                y += mass_scale * x
            ydata[lo:hi, :, c] = y

    def apply(self, x: LocalField, threads: int = 1) -> LocalField:
        """Y = A X for every element.  threads batches elements; the result
        is bitwise independent of the thread count."""
        if x.order != self.spec.order:
            raise ValueError("field order does not match the operator")
        if x.n_elements != self.n_elements:
            raise ValueError("field element count does not match the operator")
        if x.n_col != self.spec.n_col:
            raise ValueError(f"operator expects {self.spec.n_col} column(s)")
        y = LocalField.zeros(self.n_elements, self.spec.order, self.spec.n_col)
        if threads <= 1 or self.n_elements == 1:
            self._apply_range(x.data, y.data, 0, self.n_elements)
            return y
        workers = min(threads, self.n_elements)
        bounds = np.linspace(0, self.n_elements, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(self._apply_range, x.data, y.data, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for f in futures:
                f.result()
        return y


def ax_local_apply(
    spec: KernelSpec,
    elements,
    basis: SpectralBasis,
    x: LocalField,
    lam0=None,
    lam1=None,
    threads: int = 1,
) -> LocalField:
    """One-shot convenience wrapper around :class:`LocalOperator`."""
    return LocalOperator(spec, elements, basis, lam0=lam0, lam1=lam1).apply(x, threads)


_SYM = ((0, 1, 2), (1, 3, 4), (2, 4, 5))


def dense_local_matrix(
    spec: KernelSpec,
    element: Element,
    basis: SpectralBasis,
    lam0=None,
    lam1=None,
) -> np.ndarray:
    """Explicitly assembled element matrix, for oracle tests and small studies.

    Built from the dense Kronecker gradient and the weighted factors of the
    general setup route, so it is an independent reference for the
    matrix-free apply.  The matrix acts identically on each field column.
    """
    coords = LocalField(element_node_coords(element, basis)[None], spec.order)
    jac = geometry.discrete_jacobians(coords, basis)
    fs = geometry.factors_from_jacobians(jac, basis)
    g = fs.g[0]
    gwj = fs.gwj[0]
    n3 = basis.n1**3
    helm = spec.equation is Equation.HELMHOLTZ
    if not helm and (lam0 is not None or lam1 is not None):
        raise ValueError("coefficient fields apply to the Helmholtz operator only")
    lam0v = _coeff_field(lam0, 1, n3)[0] if helm else np.ones(n3)
    dmats = gradient_matrices(basis.diff_matrix)
    a = np.zeros((n3, n3))
    for row in range(3):
        m = np.zeros((n3, n3))
        for col in range(3):
            m += (lam0v * g[:, _SYM[row][col]])[:, None] * dmats[col]
        a += dmats[row].T @ m
    if helm:
        lam1v = _coeff_field(lam1, 1, n3)[0]
        a[np.diag_indices(n3)] += lam1v * gwj
    return a
