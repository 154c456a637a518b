#!/usr/bin/env python3
"""Sweep polynomial order and print the model bounds for every variant.

Usage: python scripts/roofline_sweep.py [profile] [poisson|helmholtz] [ncol]
"""

import sys

from hosfem import (
    Equation,
    FactorSource,
    KernelModel,
    KernelSpec,
    machine_balance,
    resolve_profile,
    roofline_bounds,
)


def main(argv):
    profile = argv[1] if len(argv) > 1 else "a100"
    equation = Equation(argv[2]) if len(argv) > 2 else Equation.POISSON
    n_col = int(argv[3]) if len(argv) > 3 else 1
    hw = resolve_profile(profile)
    print(f"device {hw.name}: balance {machine_balance(hw):.3f} FLOP/byte")
    print(f"{'N':>3} {'variant':<22}{'I':>8}{'R_eff':>12}{'R_tot':>12}  bound")
    for order in (3, 5, 7, 9, 11, 13, 15, 17):
        for source in FactorSource:
            try:
                spec = KernelSpec(equation, n_col, source, order)
            except ValueError:
                continue
            model = KernelModel.from_spec(spec)
            b = roofline_bounds(model, hw)
            print(
                f"{order:>3} {source.value:<22}{model.intensity:>8.3f}"
                f"{b.r_eff:>12.4e}{b.r_tot:>12.4e}  {b.bound}"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
