#!/usr/bin/env python3
"""Run the CG proxy across factor variants and print the comparison table.

Usage: python scripts/nekbone_run.py [order] [ExEyEz] [perturbation]
"""

import sys

from hosfem.cli import main as cli_main


def main(argv):
    order = argv[1] if len(argv) > 1 else "7"
    elements = argv[2] if len(argv) > 2 else "4x4x4"
    perturbation = argv[3] if len(argv) > 3 else "0.0"
    return cli_main(
        [
            "nekbone",
            "--order",
            order,
            "--elements",
            elements,
            "--perturbation",
            perturbation,
        ]
    )


if __name__ == "__main__":
    sys.exit(main(sys.argv))
