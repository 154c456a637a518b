"""Assembled-free global operator, conjugate gradients, and the solver benchmark.

The global operator is the gather / element-apply / scatter-add sandwich;
nothing global is ever assembled.  The benchmark mirrors the classic
matrix-free CG proxy: on a box mesh with homogeneous Dirichlet boundary
(imposed by masking boundary nodes), take the smooth reference field
u*(x, y, z) = sin(pi x) sin(pi y) sin(pi z), form b = M A M u* once with the
stored-factor operator, then solve the same system with every compatible
factor variant and compare iteration counts, errors, and throughput.
Residual reductions and iteration counts are expected to match across
variants since all factor routes agree to rounding.

Dot products go through a fixed-order numpy reduction rather than BLAS, so
CG histories are bitwise reproducible across thread counts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .axlocal import Equation, FactorSource, KernelSpec, LocalOperator
from .basis import SpectralBasis
from .mesh import (
    ElementKind,
    Mesh,
    boundary_node_mask,
    box_mesh,
    element_node_coords,
    gather,
    scatter_add,
)
from .workload import ax_flops

__all__ = [
    "GlobalOperator",
    "CgReport",
    "cg_solve",
    "global_node_coords",
    "sine_product_field",
    "NekboneConfig",
    "NekboneResult",
    "compatible_variants",
    "nekbone_benchmark",
]


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    # np.sum's pairwise reduction has a fixed evaluation order, unlike
    # threaded BLAS dot products
    return float(np.sum(a * b))


def _apply_mask(v: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    if mask is None:
        return v
    if v.ndim == 1:
        return np.where(mask, v, 0.0)
    return np.where(mask[:, None], v, 0.0)


class GlobalOperator:
    """Q^T A Q: gather, batched local apply, scatter-add.

    Keeps cumulative timers for the element-local stage so benchmark
    reports can attribute time."""

    def __init__(self, mesh: Mesh, spec: KernelSpec, basis: SpectralBasis, lam0=None, lam1=None):
        if spec.order != mesh.order:
            raise ValueError("kernel spec order does not match the mesh")
        self.mesh = mesh
        self.spec = spec
        self.basis = basis
        local_lam0 = _distribute(lam0, mesh)
        local_lam1 = _distribute(lam1, mesh)
        self.local_op = LocalOperator(spec, mesh.elements, basis, lam0=local_lam0, lam1=local_lam1)
        self.seconds_local = 0.0
        self.seconds_apply = 0.0
        self.applies = 0

    def reset_counters(self) -> None:
        self.seconds_local = 0.0
        self.seconds_apply = 0.0
        self.applies = 0

    def apply(self, global_values: np.ndarray, threads: int = 1) -> np.ndarray:
        t0 = time.perf_counter()
        local = gather(global_values, self.mesh)
        t1 = time.perf_counter()
        result = self.local_op.apply(local, threads=threads)
        t2 = time.perf_counter()
        out = scatter_add(result, self.mesh)
        t3 = time.perf_counter()
        self.seconds_local += t2 - t1
        self.seconds_apply += t3 - t0
        self.applies += 1
        return out


def _distribute(value, mesh: Mesh):
    """Scalars pass through; global nodal arrays are gathered to elements."""
    if value is None or np.ndim(value) == 0:
        return value
    arr = np.asarray(value, dtype=float)
    if arr.shape == (mesh.global_node_count,):
        return gather(arr, mesh).data[:, :, 0]
    return arr


@dataclass
class CgReport:
    """Outcome of one conjugate-gradient solve."""

    iterations: int
    final_relative_residual: float
    residual_history: list
    converged: bool
    solution: np.ndarray
    solution_error: float | None = None


def cg_solve(
    op,
    b: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 1000,
    mask: np.ndarray | None = None,
    threads: int = 1,
) -> CgReport:
    """Unpreconditioned CG on the (optionally masked) operator.

    mask is True at nodes kept in the system (pass the negation of a
    boundary mask for homogeneous Dirichlet conditions): the operator
    becomes M A M and b is projected on entry.  Breakdown of positive
    definiteness or a non-finite residual aborts with an error; hitting
    max_iter just reports converged=False.
    """
    b = _apply_mask(np.asarray(b, dtype=float), mask)
    x = np.zeros_like(b)
    b_norm = np.sqrt(_dot(b, b))
    if b_norm == 0.0:
        return CgReport(0, 0.0, [0.0], True, x)
    r = b.copy()
    p = r.copy()
    rr = _dot(r, r)
    history = [1.0]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ap = _apply_mask(op.apply(_apply_mask(p, mask), threads=threads), mask)
        pap = _dot(p, ap)
        if not np.isfinite(pap):
            raise FloatingPointError("CG broke down: non-finite curvature")
        if pap <= 0.0:
            raise FloatingPointError("CG broke down: operator is not positive definite")
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        rr_new = _dot(r, r)
        if not np.isfinite(rr_new):
            raise FloatingPointError("CG broke down: non-finite residual")
        rel = float(np.sqrt(rr_new) / b_norm)
        history.append(rel)
        if rel <= tol:
            converged = True
            rr = rr_new
            break
        p = r + (rr_new / rr) * p
        rr = rr_new
    return CgReport(
        iterations=iterations,
        final_relative_residual=history[-1],
        residual_history=history,
        converged=converged,
        solution=x,
    )


def global_node_coords(mesh: Mesh, basis: SpectralBasis) -> np.ndarray:
    """Physical coordinates of the global nodes, (n_global, 3).

    Shared nodes coincide across elements by mesh construction; the first
    writing element wins, which keeps the result deterministic.
    """
    out = np.full((mesh.global_node_count, 3), np.nan)
    seen = np.zeros(mesh.global_node_count, dtype=bool)
    for e, el in enumerate(mesh.elements):
        idx = mesh.local_to_global[e]
        fresh = ~seen[idx]
        out[idx[fresh]] = element_node_coords(el, basis)[fresh]
        seen[idx] = True
    return out


def sine_product_field(coords: np.ndarray) -> np.ndarray:
    """sin(pi x) sin(pi y) sin(pi z) at each node; vanishes on the unit-box boundary."""
    return np.prod(np.sin(np.pi * coords), axis=1)


@dataclass
class NekboneConfig:
    """Configuration of the CG proxy benchmark."""

    order: int = 7
    elements: tuple = (4, 4, 4)
    equation: Equation = Equation.POISSON
    n_col: int = 1
    variants: tuple | None = None  # None picks every compatible source
    tol: float = 1e-8
    max_iter: int = 200
    perturbation: float = 0.0
    seed: int = 0
    threads: int = 1


@dataclass
class NekboneResult:
    variant: str
    iterations: int
    error: float
    wall_time_s: float
    gflops_effective: float
    axlocal_share: float


def compatible_variants(equation: Equation, all_parallelepiped: bool) -> tuple:
    """Factor sources applicable to the given equation and mesh shape."""
    out = [FactorSource.STORED, FactorSource.TRILINEAR_RECOMPUTE]
    if equation is Equation.HELMHOLTZ:
        out.append(FactorSource.TRILINEAR_MERGED)
    else:
        out.append(FactorSource.TRILINEAR_PARTIAL)
    if all_parallelepiped:
        out.append(FactorSource.PARALLELEPIPED_RECOMPUTE)
    return tuple(out)


def nekbone_benchmark(config: NekboneConfig):
    """Run the CG proxy once per factor variant on a shared right-hand side.

    Returns (results, mesh) where results is a list of NekboneResult in
    variant order.  Helmholtz runs use unit coefficients.  The
    parallelepiped variant drops out automatically on perturbed meshes.
    """
    basis = SpectralBasis.build(config.order)
    ex, ey, ez = config.elements
    mesh = box_mesh(
        ex, ey, ez, config.order, perturbation=config.perturbation, seed=config.seed
    )
    interior = ~boundary_node_mask(mesh)
    coords = global_node_coords(mesh, basis)
    exact = sine_product_field(coords)
    if config.n_col == 3:
        exact = np.repeat(exact[:, None], 3, axis=1)
    elif config.n_col != 1:
        raise ValueError("n_col must be 1 or 3")

    all_ppd = all(el.kind is ElementKind.PARALLELEPIPED for el in mesh.elements)
    variants = config.variants or compatible_variants(config.equation, all_ppd)
    variants = tuple(
        v
        for v in variants
        if not (v is FactorSource.PARALLELEPIPED_RECOMPUTE and not all_ppd)
    )

    def build(source):
        spec = KernelSpec(config.equation, config.n_col, source, config.order)
        kwargs = {}
        if config.equation is Equation.HELMHOLTZ:
            kwargs = {"lam0": 1.0, "lam1": 1.0}
        return GlobalOperator(mesh, spec, basis, **kwargs)

    reference = build(FactorSource.STORED)
    b = _apply_mask(
        reference.apply(_apply_mask(exact, interior), threads=config.threads), interior
    )

    results = []
    flops_per_apply = mesh.n_elements * ax_flops(config.equation, config.n_col, config.order + 1)
    for source in variants:
        op = build(source)
        op.reset_counters()
        t0 = time.perf_counter()
        report = cg_solve(
            op,
            b,
            tol=config.tol,
            max_iter=config.max_iter,
            mask=interior,
            threads=config.threads,
        )
        wall = time.perf_counter() - t0
        diff = _apply_mask(report.solution - exact, interior)
        error = float(np.max(np.abs(diff)))
        seconds_local = max(op.seconds_local, 1e-12)
        results.append(
            NekboneResult(
                variant=source.value,
                iterations=report.iterations,
                error=error,
                wall_time_s=wall,
                gflops_effective=op.applies * flops_per_apply / seconds_local / 1e9,
                axlocal_share=min(op.seconds_local / max(wall, 1e-12), 1.0),
            )
        )
    return results, mesh
