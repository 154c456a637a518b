"""Self-contained correctness suites behind the `verify` subcommand.

Each suite returns CheckResult rows with deterministic detail strings (no
timing, no addresses), so two runs with identical numerics print identical
reports regardless of worker thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .axlocal import Equation, FactorSource, KernelSpec, LocalOperator, dense_local_matrix
from .basis import SpectralBasis, legendre_and_derivative
from .mesh import REFERENCE_CUBE, LocalField, element_node_coords, make_element
from .workload import (
    ax_flops,
    geo_flops,
    geo_memory_reals,
    stored_memory_reals,
    workload_count,
)

__all__ = ["CheckResult", "run_verification", "SUITES"]


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _rel_diff(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def _random_trilinear(rng, jitter: float = 0.2):
    verts = REFERENCE_CUBE + rng.uniform(-jitter, jitter, (8, 3))
    return make_element(verts)


def verify_basis(orders) -> list[CheckResult]:
    out = []
    basis2 = SpectralBasis.build(2)
    printed = [
        ("points-n2", basis2.points, np.array([-1.0, 0.0, 1.0])),
        ("weights-n2", basis2.weights, np.array([1.0, 4.0, 1.0]) / 3.0),
        (
            "diff-matrix-n2",
            basis2.diff_matrix,
            np.array([[-1.5, 2.0, -0.5], [-0.5, 0.0, 0.5], [0.5, -2.0, 1.5]]),
        ),
    ]
    for name, got, want in printed:
        err = float(np.max(np.abs(got - want)))
        out.append(CheckResult("basis", name, err <= 1e-12, f"max_abs_err={err:.3e}"))

    rng = np.random.default_rng(1234)
    for n in orders:
        basis = SpectralBasis.build(n)
        x, w, d = basis.points, basis.weights, basis.diff_matrix
        checks = {
            "endpoints": max(abs(x[0] + 1.0), abs(x[-1] - 1.0)),
            "weight-sum": abs(float(w.sum()) - 2.0),
            "diff-rowsum": float(np.max(np.abs(d.sum(axis=1)))),
            "diff-of-identity": float(np.max(np.abs(d @ x - 1.0))),
        }
        if n >= 2:
            _, dp = legendre_and_derivative(n, x[1:-1])
            checks["interior-root-residual"] = float(np.max(np.abs(dp)))
        coeffs = rng.uniform(-1.0, 1.0, n + 1)
        poly = np.polynomial.Polynomial(coeffs)
        checks["derivative-exactness"] = float(np.max(np.abs(d @ poly(x) - poly.deriv()(x))))
        qpoly = np.polynomial.Polynomial(rng.uniform(-1.0, 1.0, 2 * n))
        exact = qpoly.integ()(1.0) - qpoly.integ()(-1.0)
        checks["quadrature-exactness"] = abs(float(w @ qpoly(x)) - exact)
        for name, err in checks.items():
            out.append(
                CheckResult("basis", f"{name}-order{n}", err <= 1e-11, f"err={err:.3e}")
            )
    return out


def verify_workload_tables() -> list[CheckResult]:
    out = []
    P, H = Equation.POISSON, Equation.HELMHOLTZ
    worst = 0
    for n1 in range(2, 21):
        rows = [
            (ax_flops(P, 1, n1), 12 * n1**4 + 15 * n1**3),
            (ax_flops(H, 1, n1), 12 * n1**4 + 20 * n1**3),
            (ax_flops(P, 3, n1), 36 * n1**4 + 45 * n1**3),
            (ax_flops(H, 3, n1), 36 * n1**4 + 60 * n1**3),
            (stored_memory_reals(P, 1, n1), 8 * n1**3 + n1**2),
            (stored_memory_reals(H, 1, n1), 11 * n1**3 + n1**2),
            (stored_memory_reals(P, 3, n1), 12 * n1**3 + n1**2),
            (stored_memory_reals(H, 3, n1), 15 * n1**3 + n1**2),
            (geo_flops(FactorSource.PARALLELEPIPED_RECOMPUTE, P, n1), 7 * n1**3),
            (geo_flops(FactorSource.PARALLELEPIPED_RECOMPUTE, H, n1), 8 * n1**3),
            (geo_flops(FactorSource.TRILINEAR_RECOMPUTE, P, n1), 72 * n1 + 45 * n1**2 + 80 * n1**3),
            (geo_flops(FactorSource.TRILINEAR_MERGED, H, n1), 72 * n1 + 45 * n1**2 + 60 * n1**3),
            (geo_flops(FactorSource.TRILINEAR_PARTIAL, P, n1), 72 * n1 + 45 * n1**2 + 60 * n1**3),
            (geo_memory_reals(FactorSource.TRILINEAR_RECOMPUTE, P, n1), 24),
            (geo_memory_reals(FactorSource.TRILINEAR_MERGED, H, n1), 24),
            (geo_memory_reals(FactorSource.TRILINEAR_PARTIAL, P, n1), 24 + n1**3),
            (geo_memory_reals(FactorSource.PARALLELEPIPED_RECOMPUTE, P, n1), 6),
            (geo_memory_reals(FactorSource.PARALLELEPIPED_RECOMPUTE, H, n1), 7),
        ]
        worst = max(worst, max(abs(a - b) for a, b in rows))
    out.append(
        CheckResult(
            "workload",
            "per-element-identities-n1-2..20",
            worst == 0,
            f"max_int_deviation={worst}",
        )
    )
    return out


def _spec_variants(equation: Equation):
    if equation is Equation.HELMHOLTZ:
        return (
            FactorSource.STORED,
            FactorSource.TRILINEAR_RECOMPUTE,
            FactorSource.TRILINEAR_MERGED,
        )
    return (
        FactorSource.STORED,
        FactorSource.TRILINEAR_RECOMPUTE,
        FactorSource.TRILINEAR_PARTIAL,
    )


def verify_operator_oracle(orders, equations, threads: int = 1) -> list[CheckResult]:
    """Dense element matrices versus the matrix-free apply, all variants."""
    out = []
    rng = np.random.default_rng(42)
    for order in orders:
        basis = SpectralBasis.build(order)
        n3 = basis.n1**3
        elements = [_random_trilinear(rng) for _ in range(3)]
        for equation in equations:
            dense = [dense_local_matrix(KernelSpec(equation, 1, FactorSource.STORED, order), el, basis) for el in elements]
            sym = max(float(np.max(np.abs(a - a.T))) / max(float(np.max(np.abs(a))), 1e-300) for a in dense)
            out.append(
                CheckResult(
                    "oracle",
                    f"dense-symmetry-{equation.value}-order{order}",
                    sym <= 1e-12,
                    f"rel_err={sym:.3e}",
                )
            )
            for n_col in (1, 3):
                x = LocalField(rng.standard_normal((len(elements), n3, n_col)), order)
                want = np.stack([a @ x.data[e] for e, a in enumerate(dense)])
                worst = 0.0
                for source in _spec_variants(equation):
                    spec = KernelSpec(equation, n_col, source, order)
                    op = LocalOperator(spec, elements, basis)
                    got = op.apply(x, threads=threads)
                    worst = max(worst, _rel_diff(got.data, want))
                out.append(
                    CheckResult(
                        "oracle",
                        f"dense-vs-matrix-free-{equation.value}-ncol{n_col}-order{order}",
                        worst <= 1e-12,
                        f"rel_err={worst:.3e}",
                    )
                )
        shear = np.array([[0.9, 0.2, -0.1], [0.0, 1.1, 0.3], [0.15, 0.0, 0.8]])
        ppd = [make_element(REFERENCE_CUBE @ shear.T + s) for s in (0.0, 0.5)]
        for equation in equations:
            spec = KernelSpec(equation, 1, FactorSource.PARALLELEPIPED_RECOMPUTE, order)
            op = LocalOperator(spec, ppd, basis)
            x = LocalField(rng.standard_normal((len(ppd), n3, 1)), order)
            want = np.stack(
                [
                    dense_local_matrix(
                        KernelSpec(equation, 1, FactorSource.STORED, order), el, basis
                    )
                    @ x.data[e]
                    for e, el in enumerate(ppd)
                ]
            )
            err = _rel_diff(op.apply(x, threads=threads).data, want)
            out.append(
                CheckResult(
                    "oracle",
                    f"dense-vs-parallelepiped-{equation.value}-order{order}",
                    err <= 1e-12,
                    f"rel_err={err:.3e}",
                )
            )
    return out


def verify_factor_routes(orders) -> list[CheckResult]:
    """All factor routes against the dense-inversion setup route."""
    out = []
    rng = np.random.default_rng(7)
    for order in orders:
        basis = SpectralBasis.build(order)
        elements = [_random_trilinear(rng) for _ in range(4)]
        verts = np.stack([el.vertices for el in elements])
        coords = LocalField(
            np.stack([element_node_coords(el, basis) for el in elements]), order
        )
        jac = geometry.discrete_jacobians(coords, basis)
        ref = geometry.factors_from_jacobians(jac, basis)
        tri = geometry.trilinear_factors(verts, basis).to_weighted()
        err_g = _rel_diff(tri.g, ref.g)
        err_m = _rel_diff(tri.gwj, ref.gwj)
        err = max(err_g, err_m)
        out.append(
            CheckResult(
                "routes",
                f"trilinear-vs-stored-order{order}",
                err <= 1e-12,
                f"rel_err={err:.3e}",
            )
        )
        lam_geo = geometry.partial_recompute_setup(verts, basis)
        partial = geometry.trilinear_factors(verts, basis, with_lam_geo=False, with_gwj=False)
        err_p = _rel_diff(lam_geo[..., None] * partial.g, ref.g)
        out.append(
            CheckResult(
                "routes",
                f"partial-vs-stored-order{order}",
                err_p <= 1e-12,
                f"rel_err={err_p:.3e}",
            )
        )
        ppd = make_element(REFERENCE_CUBE * np.array([0.7, 1.1, 0.9]) + 0.25)
        h = geometry.parallelepiped_setup(ppd.vertices)
        got = geometry.parallelepiped_factor_field(h.h[None], basis)
        coords_ppd = LocalField(element_node_coords(ppd, basis)[None], order)
        ref_ppd = geometry.factors_from_jacobians(
            geometry.discrete_jacobians(coords_ppd, basis), basis
        )
        err_ppd = max(_rel_diff(got.g, ref_ppd.g), _rel_diff(got.gwj, ref_ppd.gwj))
        out.append(
            CheckResult(
                "routes",
                f"parallelepiped-vs-stored-order{order}",
                err_ppd <= 1e-13,
                f"rel_err={err_ppd:.3e}",
            )
        )
    return out


def verify_determinism(threads: int = 4) -> list[CheckResult]:
    """Thread-count independence of the batched apply."""
    out = []
    rng = np.random.default_rng(99)
    order = 3
    basis = SpectralBasis.build(order)
    elements = [_random_trilinear(rng) for _ in range(8)]
    x = LocalField(rng.standard_normal((8, basis.n1**3, 1)), order)
    for equation in (Equation.POISSON, Equation.HELMHOLTZ):
        for source in _spec_variants(equation):
            spec = KernelSpec(equation, 1, source, order)
            op = LocalOperator(spec, elements, basis)
            serial = op.apply(x, threads=1)
            pooled = op.apply(x, threads=max(threads, 2))
            identical = bool(np.array_equal(serial.data, pooled.data))
            out.append(
                CheckResult(
                    "determinism",
                    f"threads-bitwise-{equation.value}-{source.value}",
                    identical,
                    "bitwise_equal=" + str(identical).lower(),
                )
            )
    return out


SUITES = ("basis", "workload", "oracle", "routes", "determinism")


def run_verification(
    orders=None,
    equations=None,
    suites=SUITES,
    threads: int = 1,
) -> list[CheckResult]:
    """Run the selected suites; defaults cover a broad, fast scope."""
    equations = tuple(equations or (Equation.POISSON, Equation.HELMHOLTZ))
    results: list[CheckResult] = []
    if "basis" in suites:
        results += verify_basis(orders or range(1, 13))
    if "workload" in suites:
        results += verify_workload_tables()
    if "oracle" in suites:
        results += verify_operator_oracle(orders or (1, 2, 3, 5), equations, threads=threads)
    if "routes" in suites:
        results += verify_factor_routes(orders or (1, 3, 5, 7))
    if "determinism" in suites:
        results += verify_determinism(threads=max(threads, 4))
    return results
