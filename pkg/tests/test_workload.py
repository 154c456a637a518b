"""Per-element flop and byte counts as exact integer identities."""

import pytest

from hosfem.axlocal import Equation, FactorSource, KernelSpec
from hosfem.workload import (
    FP_SIZE,
    ax_flops,
    base_memory_reals,
    geo_flops,
    geo_memory_reals,
    matrix_unit_split,
    stored_memory_reals,
    workload_count,
)

P, H = Equation.POISSON, Equation.HELMHOLTZ


@pytest.mark.parametrize("n1", range(2, 21))
def test_operator_flops_formulae(n1):
    assert ax_flops(P, 1, n1) == 12 * n1**4 + 15 * n1**3
    assert ax_flops(H, 1, n1) == 12 * n1**4 + 20 * n1**3
    assert ax_flops(P, 3, n1) == 36 * n1**4 + 45 * n1**3
    assert ax_flops(H, 3, n1) == 36 * n1**4 + 60 * n1**3


@pytest.mark.parametrize("n1", range(2, 21))
def test_stored_memory_formulae(n1):
    assert stored_memory_reals(P, 1, n1) == 8 * n1**3 + n1**2
    assert stored_memory_reals(H, 1, n1) == 11 * n1**3 + n1**2
    assert stored_memory_reals(P, 3, n1) == 12 * n1**3 + n1**2
    assert stored_memory_reals(H, 3, n1) == 15 * n1**3 + n1**2


@pytest.mark.parametrize("n1", range(2, 21))
def test_factor_route_overheads(n1):
    ppd = FactorSource.PARALLELEPIPED_RECOMPUTE
    tri = FactorSource.TRILINEAR_RECOMPUTE
    merged = FactorSource.TRILINEAR_MERGED
    partial = FactorSource.TRILINEAR_PARTIAL
    stored = FactorSource.STORED

    assert geo_flops(stored, P, n1) == 0
    assert geo_flops(stored, H, n1) == 0
    assert geo_flops(ppd, P, n1) == 7 * n1**3
    assert geo_flops(ppd, H, n1) == 8 * n1**3
    assert geo_flops(tri, P, n1) == 72 * n1 + 45 * n1**2 + 80 * n1**3
    assert geo_flops(tri, H, n1) == 72 * n1 + 45 * n1**2 + 80 * n1**3
    assert geo_flops(merged, H, n1) == 72 * n1 + 45 * n1**2 + 60 * n1**3
    assert geo_flops(partial, P, n1) == 72 * n1 + 45 * n1**2 + 60 * n1**3

    assert geo_memory_reals(stored, P, n1) == 6 * n1**3
    assert geo_memory_reals(stored, H, n1) == 7 * n1**3
    assert geo_memory_reals(ppd, P, n1) == 6
    assert geo_memory_reals(ppd, H, n1) == 7
    assert geo_memory_reals(tri, P, n1) == 24
    assert geo_memory_reals(tri, H, n1) == 24
    assert geo_memory_reals(merged, H, n1) == 24
    assert geo_memory_reals(partial, P, n1) == 24 + n1**3


@pytest.mark.parametrize("n1", range(2, 21))
def test_workload_count_assembles_the_pieces(n1):
    for equation in (P, H):
        for n_col in (1, 3):
            spec = KernelSpec(equation, n_col, FactorSource.STORED, n1 - 1)
            wc = workload_count(spec)
            assert wc.f_ax == ax_flops(equation, n_col, n1)
            assert wc.f_geo == 0
            assert wc.m_bytes == FP_SIZE * stored_memory_reals(equation, n_col, n1)
    spec = KernelSpec(P, 1, FactorSource.TRILINEAR_RECOMPUTE, n1 - 1)
    wc = workload_count(spec)
    base = base_memory_reals(P, 1, n1)
    assert wc.m_bytes == FP_SIZE * (base + 24)
    assert wc.f_geo == geo_flops(FactorSource.TRILINEAR_RECOMPUTE, P, n1)


def test_frozen_reference_points():
    # hand-evaluated values at n1 = 8
    wc = workload_count(KernelSpec(P, 1, FactorSource.STORED, 7))
    assert wc.f_ax == 56832
    assert wc.m_bytes == 33280
    wc = workload_count(KernelSpec(H, 1, FactorSource.TRILINEAR_RECOMPUTE, 7))
    assert wc.f_geo == 44416
    assert wc.f_ax == 59392
    assert matrix_unit_split(KernelSpec(P, 1, FactorSource.STORED, 7)) == 32768
    wc = workload_count(
        KernelSpec(H, 1, FactorSource.TRILINEAR_RECOMPUTE, 7), include_dmat_traffic=False
    )
    assert wc.m_bytes == (4 * 512 + 24) * 8 == 16576


def test_dmat_traffic_toggle():
    n1 = 8
    with_d = workload_count(KernelSpec(P, 1, FactorSource.STORED, n1 - 1))
    without = workload_count(
        KernelSpec(P, 1, FactorSource.STORED, n1 - 1), include_dmat_traffic=False
    )
    assert with_d.m_bytes - without.m_bytes == FP_SIZE * n1**2
    assert with_d.f_ax == without.f_ax


def test_matrix_unit_split_formula():
    for n1 in range(2, 12):
        for n_col in (1, 3):
            spec = KernelSpec(H, n_col, FactorSource.STORED, n1 - 1)
            mu = matrix_unit_split(spec)
            assert mu == n_col * 8 * n1**4
            assert mu <= workload_count(spec).f_ax


def test_spec_pairing_is_enforced_at_spec_level():
    # the formula helpers are pure table lookups; the pairing rules live in
    # KernelSpec and reject merged/partial with the wrong equation
    with pytest.raises(ValueError):
        KernelSpec(P, 1, FactorSource.TRILINEAR_MERGED, 7)
    with pytest.raises(ValueError):
        KernelSpec(H, 1, FactorSource.TRILINEAR_PARTIAL, 7)
