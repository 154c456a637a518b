"""Per-element flop and memory-traffic models for every kernel variant.

All counts are exact integer formulas in n1 = order + 1.  The operator
workload (f_ax) depends only on the equation and column count; the factor
workload and factor traffic (f_geo, and the geometry share of m_bytes)
depend on the factor source:

    source          f_geo (Poisson / Helmholtz)      factor reals
    stored          0                                 6 n1^3 / 7 n1^3
    parallelepiped  7 n1^3 / 8 n1^3                   6 / 7
    trilinear       72 n1 + 45 n1^2 + 80 n1^3         24
    merged (H)      72 n1 + 45 n1^2 + 60 n1^3         24
    partial (P)     72 n1 + 45 n1^2 + 60 n1^3         24 + n1^3

The non-factor traffic is the input and output columns, the two Helmholtz
coefficient fields (or their merged replacements), and the n1^2
differentiation matrix; the matrix term can be dropped to model kernels
that keep it in on-chip memory.  The package is FP64 only, so a real is 8
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .axlocal import Equation, FactorSource, KernelSpec

__all__ = [
    "FP_SIZE",
    "WorkloadCount",
    "ax_flops",
    "geo_flops",
    "geo_memory_reals",
    "base_memory_reals",
    "stored_memory_reals",
    "workload_count",
    "matrix_unit_split",
]

FP_SIZE = 8


@dataclass(frozen=True)
class WorkloadCount:
    """Effective operator flops, factor flops, and bytes moved, per element."""

    f_ax: int
    f_geo: int
    m_bytes: int


def ax_flops(equation: Equation, n_col: int, n1: int) -> int:
    """Effective operator flops per element.

    12 n1^4 for the six contractions plus 15 n1^3 for the factor stage per
    column; Helmholtz adds 5 n1^3 per column for the mass term.
    """
    per_col = 12 * n1**4 + 15 * n1**3
    if equation is Equation.HELMHOLTZ:
        per_col += 5 * n1**3
    return n_col * per_col


def geo_flops(source: FactorSource, equation: Equation, n1: int) -> int:
    """Factor evaluation flops per element and apply."""
    helm = equation is Equation.HELMHOLTZ
    if source is FactorSource.STORED:
        return 0
    if source is FactorSource.PARALLELEPIPED_RECOMPUTE:
        return (8 if helm else 7) * n1**3
    if source is FactorSource.TRILINEAR_RECOMPUTE:
        return 72 * n1 + 45 * n1**2 + 80 * n1**3
    # merged and partial both skip the per-node scalar tail
    return 72 * n1 + 45 * n1**2 + 60 * n1**3


def geo_memory_reals(source: FactorSource, equation: Equation, n1: int) -> int:
    """Reals of factor data loaded per element and apply."""
    helm = equation is Equation.HELMHOLTZ
    if source is FactorSource.STORED:
        return (7 if helm else 6) * n1**3
    if source is FactorSource.PARALLELEPIPED_RECOMPUTE:
        return 7 if helm else 6
    if source is FactorSource.TRILINEAR_RECOMPUTE:
        return 24
    if source is FactorSource.TRILINEAR_MERGED:
        return 24
    return 24 + n1**3  # partial keeps the per-node scalar in memory


def base_memory_reals(equation: Equation, n_col: int, n1: int, include_dmat: bool = True) -> int:
    """Non-factor traffic: field columns, coefficients, differentiation matrix."""
    reals = 2 * n_col * n1**3
    if equation is Equation.HELMHOLTZ:
        reals += 2 * n1**3
    if include_dmat:
        reals += n1**2
    return reals


def stored_memory_reals(equation: Equation, n_col: int, n1: int) -> int:
    """Full traffic of the stored-factor baseline, in reals."""
    return base_memory_reals(equation, n_col, n1) + geo_memory_reals(
        FactorSource.STORED, equation, n1
    )


def workload_count(
    spec: KernelSpec, include_dmat_traffic: bool = True, fp_size: int = FP_SIZE
) -> WorkloadCount:
    """Per-element workload of one apply under the given kernel spec."""
    n1 = spec.n1
    reals = base_memory_reals(
        spec.equation, spec.n_col, n1, include_dmat=include_dmat_traffic
    ) + geo_memory_reals(spec.factor_source, spec.equation, n1)
    return WorkloadCount(
        f_ax=ax_flops(spec.equation, spec.n_col, n1),
        f_geo=geo_flops(spec.factor_source, spec.equation, n1),
        m_bytes=reals * fp_size,
    )


def matrix_unit_split(spec: KernelSpec) -> int:
    """Flops mappable onto matrix units: the r and s contractions, forward
    and transposed, are plain matrix-matrix products of 8 n1^4 flops per
    column."""
    return spec.n_col * 8 * spec.n1**4
