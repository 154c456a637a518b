#!/usr/bin/env python3
"""Time the batched local apply for every variant at a handful of orders.

Emits the bench CSV schema on stdout, one row per (order, variant).
Usage: python scripts/kernel_bench.py [equation] [E] [repeats] [profile]
"""

import sys
import time

import numpy as np

from hosfem import (
    Equation,
    FactorSource,
    KernelModel,
    KernelSpec,
    LocalField,
    LocalOperator,
    SpectralBasis,
    box_mesh,
    resolve_profile,
    roofline_bounds,
    workload_count,
)
from hosfem.cli import BenchRecord, bench_records_to_csv


def main(argv):
    equation = Equation(argv[1] if len(argv) > 1 else "poisson")
    e_count = int(argv[2] if len(argv) > 2 else "64")
    repeats = int(argv[3] if len(argv) > 3 else "3")
    hw = resolve_profile(argv[4] if len(argv) > 4 else "a100")
    rng = np.random.default_rng(0)
    records = []
    for order in (3, 7):
        basis = SpectralBasis.build(order)
        mesh = box_mesh(e_count, 1, 1, order)
        x = LocalField(rng.standard_normal((e_count, basis.n1**3, 1)), order)
        for source in FactorSource:
            try:
                spec = KernelSpec(equation, 1, source, order)
            except ValueError:
                continue
            op = LocalOperator(spec, mesh.elements, basis)
            best = min(
                _timed(op, x) for _ in range(repeats)
            )
            wl = workload_count(spec)
            p_eff = e_count * wl.f_ax / best
            bounds = roofline_bounds(KernelModel.from_spec(spec), hw)
            records.append(
                BenchRecord(
                    equation=equation.value,
                    n_col=1,
                    N=order,
                    variant=source.value,
                    E=e_count,
                    repeats=repeats,
                    best_time_s=best,
                    P_eff=p_eff,
                    P_tot=e_count * (wl.f_ax + wl.f_geo) / best,
                    roofline_R_eff=bounds.r_eff,
                    efficiency_pct=100.0 * p_eff / bounds.r_eff,
                )
            )
    sys.stdout.write(bench_records_to_csv(records))
    return 0


def _timed(op, x):
    t0 = time.perf_counter()
    op.apply(x)
    return time.perf_counter() - t0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
