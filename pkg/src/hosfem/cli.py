"""Command-line front end: verify, bench, roofline, nekbone."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from .axlocal import Equation, FactorSource, KernelSpec, LocalOperator
from .basis import SpectralBasis
from .mesh import LocalField, box_mesh
from .roofline import KernelModel, preset_names, resolve_profile, roofline_bounds
from .solver import NekboneConfig, nekbone_benchmark
from .verify import SUITES, run_verification
from .workload import workload_count

BENCH_CSV_HEADER = "equation,n_col,N,variant,E,repeats,best_time_s,P_eff,P_tot,roofline_R_eff,efficiency_pct"


@dataclass
class BenchRecord:
    equation: str
    n_col: int
    N: int
    variant: str
    E: int
    repeats: int
    best_time_s: float
    P_eff: float
    P_tot: float
    roofline_R_eff: float
    efficiency_pct: float

    def csv_row(self) -> str:
        return ",".join(
            [
                self.equation,
                str(self.n_col),
                str(self.N),
                self.variant,
                str(self.E),
                str(self.repeats),
                repr(self.best_time_s),
                repr(self.P_eff),
                repr(self.P_tot),
                repr(self.roofline_R_eff),
                repr(self.efficiency_pct),
            ]
        )


def bench_records_to_csv(records) -> str:
    return "\n".join([BENCH_CSV_HEADER] + [r.csv_row() for r in records]) + "\n"


def parse_bench_csv(text: str) -> list[BenchRecord]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != BENCH_CSV_HEADER:
        raise ValueError("unrecognized bench CSV header")
    out = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 11:
            raise ValueError(f"bench CSV row has {len(f)} fields, expected 11")
        out.append(
            BenchRecord(
                equation=f[0],
                n_col=int(f[1]),
                N=int(f[2]),
                variant=f[3],
                E=int(f[4]),
                repeats=int(f[5]),
                best_time_s=float(f[6]),
                P_eff=float(f[7]),
                P_tot=float(f[8]),
                roofline_R_eff=float(f[9]),
                efficiency_pct=float(f[10]),
            )
        )
    return out


def _parse_elements(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) == 1:
        value = int(parts[0])
        if value < 1:
            raise ValueError("element count must be positive")
        return (value, 1, 1)
    if len(parts) != 3:
        raise ValueError("elements must be an integer or ExEyEz, e.g. 4x4x4")
    dims = tuple(int(p) for p in parts)
    if any(d < 1 for d in dims):
        raise ValueError("element dimensions must be positive")
    return dims


def _parse_variants(text: str) -> tuple[FactorSource, ...]:
    return tuple(FactorSource(v.strip()) for v in text.split(",") if v.strip())


def _add_common(parser) -> None:
    parser.add_argument("--equation", choices=[e.value for e in Equation], default="poisson")
    parser.add_argument("--ncol", type=int, choices=(1, 3), default=1)
    parser.add_argument("--order", type=int, default=7, help="polynomial order N (nodes per direction N+1)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--format", choices=("text", "csv", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hosfem", description="matrix-free spectral-element operator toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run built-in correctness suites")
    p_verify.add_argument("--orders", default=None, help="comma list of polynomial orders")
    p_verify.add_argument("--equation", choices=[e.value for e in Equation], default=None)
    p_verify.add_argument("--suites", default=None, help="comma list from: " + ",".join(SUITES))
    p_verify.add_argument("--threads", type=int, default=1)

    p_bench = sub.add_parser("bench", help="time the batched local operator")
    _add_common(p_bench)
    p_bench.add_argument("--variant", choices=[s.value for s in FactorSource], default="stored")
    p_bench.add_argument("--elements", default="512", help="E or ExEyEz box dimensions")
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.add_argument("--profile", default="a100", help="hardware profile preset name or file path")
    p_bench.add_argument("--perturbation", type=float, default=0.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--list-profiles", action="store_true")

    p_roof = sub.add_parser("roofline", help="model-only bounds for every factor variant")
    _add_common(p_roof)
    p_roof.add_argument("--profile", default="a100")
    p_roof.add_argument("--tensor-core", action="store_true", help="route the unit-stride contraction share through the matrix-unit peak")
    p_roof.add_argument("--overlap", action="store_true", help="assume compute and memory overlap (max instead of sum)")
    p_roof.add_argument("--crossing", action="store_true", help="also report the smallest n1 whose stored-variant intensity reaches machine balance")
    p_roof.add_argument("--list-profiles", action="store_true")

    p_nek = sub.add_parser("nekbone", help="conjugate-gradient benchmark over factor variants")
    p_nek.add_argument("--equation", choices=[e.value for e in Equation], default=None)
    p_nek.add_argument("--ncol", type=int, choices=(1, 3), default=None)
    p_nek.add_argument("--order", type=int, default=None)
    p_nek.add_argument("--threads", type=int, default=1)
    p_nek.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p_nek.add_argument("--config", default=None, help="key-value config file; flags override")
    p_nek.add_argument("--elements", default=None, help="E or ExEyEz box dimensions")
    p_nek.add_argument("--variants", default=None, help="comma list of factor variants")
    p_nek.add_argument("--tol", type=float, default=None)
    p_nek.add_argument("--max-iter", type=int, default=None)
    p_nek.add_argument("--perturbation", type=float, default=None)
    p_nek.add_argument("--seed", type=int, default=None)
    return parser


def cmd_verify(args) -> int:
    orders = None
    if args.orders:
        orders = tuple(int(t) for t in args.orders.split(","))
    equations = (Equation(args.equation),) if args.equation else None
    suites = tuple(args.suites.split(",")) if args.suites else SUITES
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    results = run_verification(orders=orders, equations=equations, suites=suites, threads=args.threads)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed += 0 if r.passed else 1
        print(f"{status} {r.suite}/{r.name} {r.detail}")
    print(f"{len(results) - failed} passed, {failed} failed")
    return 0 if failed == 0 else 1


def _profile_listing() -> int:
    for name in preset_names():
        print(name)
    return 0


def cmd_bench(args) -> int:
    if args.list_profiles:
        return _profile_listing()
    equation = Equation(args.equation)
    source = FactorSource(args.variant)
    if source is FactorSource.PARALLELEPIPED_RECOMPUTE and args.perturbation > 0:
        raise ValueError("the parallelepiped variant requires an unperturbed box mesh")
    ex, ey, ez = _parse_elements(args.elements)
    spec = KernelSpec(equation, args.ncol, source, args.order)
    basis = SpectralBasis.build(args.order)
    mesh = box_mesh(ex, ey, ez, args.order, perturbation=args.perturbation, seed=args.seed)
    op = LocalOperator(spec, mesh.elements, basis)
    rng = np.random.default_rng(args.seed)
    x = LocalField(rng.standard_normal((len(mesh.elements), basis.n1**3, args.ncol)), args.order)
    best = np.inf
    for _ in range(max(args.repeats, 1)):
        t0 = time.perf_counter()
        op.apply(x, threads=args.threads)
        best = min(best, time.perf_counter() - t0)
    wl = workload_count(spec)
    e_count = len(mesh.elements)
    p_eff = e_count * wl.f_ax / best
    p_tot = e_count * (wl.f_ax + wl.f_geo) / best
    hw = resolve_profile(args.profile)
    bounds = roofline_bounds(KernelModel.from_spec(spec), hw)
    record = BenchRecord(
        equation=equation.value,
        n_col=args.ncol,
        N=args.order,
        variant=source.value,
        E=e_count,
        repeats=args.repeats,
        best_time_s=best,
        P_eff=p_eff,
        P_tot=p_tot,
        roofline_R_eff=bounds.r_eff,
        efficiency_pct=100.0 * p_eff / bounds.r_eff,
    )
    if record.efficiency_pct > 110.0:
        print(
            f"warning: measured rate is {record.efficiency_pct:.1f}% of the model bound; "
            "check that the hardware profile matches this machine",
            file=sys.stderr,
        )
    if args.format == "csv":
        print(bench_records_to_csv([record]), end="")
    elif args.format == "json":
        print(json.dumps(dataclasses.asdict(record), indent=2))
    else:
        print(f"equation        {record.equation}")
        print(f"variant         {record.variant}")
        print(f"order N         {record.N}  (n1 = {record.N + 1})")
        print(f"columns         {record.n_col}")
        print(f"elements        {record.E}")
        print(f"best apply      {record.best_time_s:.6e} s  (over {record.repeats} repeats)")
        print(f"P_eff           {record.P_eff:.4e} FLOP/s")
        print(f"P_tot           {record.P_tot:.4e} FLOP/s")
        print(f"model bound     {record.roofline_R_eff:.4e} FLOP/s  [{hw.name}]")
        print(f"efficiency      {record.efficiency_pct:.1f} %")
    return 0


def _variant_rows(args, hw):
    equation = Equation(args.equation)
    rows = []
    for source in FactorSource:
        try:
            spec = KernelSpec(equation, args.ncol, source, args.order)
        except ValueError:
            continue
        model = KernelModel.from_spec(spec, tensor_core=args.tensor_core)
        bounds = roofline_bounds(model, hw, overlap=args.overlap)
        rows.append((source.value, model, bounds))
    return rows


def cmd_roofline(args) -> int:
    if args.list_profiles:
        return _profile_listing()
    hw = resolve_profile(args.profile)
    rows = _variant_rows(args, hw)
    if args.format == "json":
        payload = [
            {
                "variant": name,
                "f_ax": model.f_ax,
                "f_geo": model.f_geo,
                "m_bytes": model.m_bytes,
                "intensity": model.intensity,
                "t_cmp": bounds.t_cmp,
                "t_mem": bounds.t_mem,
                "R_eff": bounds.r_eff,
                "R_tot": bounds.r_tot,
                "bound": bounds.bound,
            }
            for name, model, bounds in rows
        ]
        print(json.dumps(payload, indent=2))
    elif args.format == "csv":
        print("variant,f_ax,f_geo,m_bytes,intensity,t_cmp,t_mem,R_eff,R_tot,bound")
        for name, model, bounds in rows:
            print(
                ",".join(
                    [
                        name,
                        str(model.f_ax),
                        str(model.f_geo),
                        str(model.m_bytes),
                        repr(model.intensity),
                        repr(bounds.t_cmp),
                        repr(bounds.t_mem),
                        repr(bounds.r_eff),
                        repr(bounds.r_tot),
                        bounds.bound,
                    ]
                )
            )
    else:
        print(
            f"profile {hw.name}: equation={args.equation} n_col={args.ncol} N={args.order}"
            + (" tensor-core" if args.tensor_core else "")
        )
        header = f"{'variant':<22}{'F_ax':>10}{'F_geo':>10}{'M bytes':>10}{'I':>9}{'R_eff':>12}{'R_tot':>12}  bound"
        print(header)
        for name, model, bounds in rows:
            print(
                f"{name:<22}{model.f_ax:>10}{model.f_geo:>10}{model.m_bytes:>10}"
                f"{model.intensity:>9.3f}{bounds.r_eff:>12.4e}{bounds.r_tot:>12.4e}  {bounds.bound}"
            )
    if args.crossing:
        from .roofline import mbp_crossing

        n1 = mbp_crossing(Equation(args.equation), args.ncol, hw)
        if n1 is None:
            print("crossing: not reached for n1 <= 64")
        else:
            print(f"crossing: stored-variant intensity reaches machine balance at n1 = {n1} (N = {n1 - 1})")
    return 0


def _read_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition(" ")
            if not value.strip():
                raise ValueError(f"config line needs a key and a value: {raw.rstrip()}")
            values[key.strip()] = value.strip()
    return values


def _nekbone_config(args) -> NekboneConfig:
    cfg = {}
    if args.config:
        cfg = _read_config(args.config)
    order = args.order if args.order is not None else int(cfg.get("order", 7))
    elements = args.elements or cfg.get("elements", "4x4x4")
    equation = Equation(args.equation or cfg.get("equation", "poisson"))
    n_col = args.ncol if args.ncol is not None else int(cfg.get("ncol", 1))
    variants_text = args.variants or cfg.get("variants", "")
    variants = _parse_variants(variants_text) if variants_text else None
    tol = args.tol if args.tol is not None else float(cfg.get("tol", 1e-8))
    max_iter = args.max_iter if args.max_iter is not None else int(cfg.get("max_iter", 200))
    perturbation = (
        args.perturbation if args.perturbation is not None else float(cfg.get("perturbation", 0.0))
    )
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    return NekboneConfig(
        order=order,
        elements=_parse_elements(elements),
        equation=equation,
        n_col=n_col,
        variants=variants,
        tol=tol,
        max_iter=max_iter,
        perturbation=perturbation,
        seed=seed,
        threads=args.threads,
    )


def cmd_nekbone(args) -> int:
    config = _nekbone_config(args)
    results, mesh = nekbone_benchmark(config)
    if args.format == "json":
        print(json.dumps([dataclasses.asdict(r) for r in results], indent=2))
        return 0
    if args.format == "csv":
        print("variant,iterations,error,wall_time_s,gflops_effective,axlocal_share")
        for r in results:
            print(
                ",".join(
                    [
                        r.variant,
                        str(r.iterations),
                        repr(r.error),
                        repr(r.wall_time_s),
                        repr(r.gflops_effective),
                        repr(r.axlocal_share),
                    ]
                )
            )
        return 0
    ex, ey, ez = config.elements
    print(
        f"{config.equation.value} N={config.order} mesh {ex}x{ey}x{ez} "
        f"({len(mesh.elements)} elements, {mesh.global_node_count} nodes) tol={config.tol:g}"
    )
    print(f"{'variant':<22}{'iters':>6}{'max error':>13}{'wall s':>10}{'GF/s':>9}{'Ax share':>10}")
    for r in results:
        print(
            f"{r.variant:<22}{r.iterations:>6}{r.error:>13.3e}{r.wall_time_s:>10.3f}"
            f"{r.gflops_effective:>9.2f}{r.axlocal_share:>10.2f}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "verify": cmd_verify,
        "bench": cmd_bench,
        "roofline": cmd_roofline,
        "nekbone": cmd_nekbone,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
