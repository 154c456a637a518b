"""Time-based roofline model for the operator kernels.

Instead of intersecting intensity lines on a log-log chart, the model works
in time: a kernel that moves M bytes and executes F flops needs at least

    t_mem = M / BW          and        t_cmp = F_mma / P_mma + F_rest / P_gen

seconds (the compute terms add by default, modelling no overlap between
matrix-unit and general pipelines; overlap=True takes their max instead).
The attainable bounds follow as

    R_eff = F_ax / max(t_cmp, t_mem),    R_tot = (F_ax + F_geo) / max(t_cmp, t_mem)

where F_ax counts only the effective operator work, so recomputation
variants are compared on useful throughput, not on inflated flop totals.
Measured performance uses the same split: P_eff = F_ax / t_measured.

Hardware profiles are plain text files of `key value` lines; two presets
with published FP64 figures ship with the package (bandwidths: measured
stream-style value and theoretical peak).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

from .axlocal import Equation, KernelSpec
from .workload import (
    FP_SIZE,
    ax_flops,
    matrix_unit_split,
    stored_memory_reals,
    workload_count,
)

__all__ = [
    "HardwareProfile",
    "KernelModel",
    "RooflineBounds",
    "load_profile",
    "resolve_profile",
    "preset_names",
    "operational_intensity",
    "machine_balance",
    "roofline_bounds",
    "measured_performance",
    "mbp_crossing",
]


@dataclass(frozen=True)
class HardwareProfile:
    """FP64 capability of one device."""

    name: str
    peak_general: float
    bandwidth_measured: float
    bandwidth_theoretical: float
    peak_matrix: float | None = None

    def __post_init__(self):
        for label in ("peak_general", "bandwidth_measured", "bandwidth_theoretical"):
            if getattr(self, label) <= 0:
                raise ValueError(f"{label} must be positive")
        if self.peak_matrix is not None and self.peak_matrix <= 0:
            raise ValueError("peak_matrix must be positive when given")
        if self.bandwidth_measured > self.bandwidth_theoretical:
            raise ValueError("measured bandwidth cannot exceed the theoretical peak")

    def bandwidth(self, which: str = "measured") -> float:
        if which == "measured":
            return self.bandwidth_measured
        if which == "theoretical":
            return self.bandwidth_theoretical
        raise ValueError("bandwidth selector must be 'measured' or 'theoretical'")

    def peak(self, which: str = "general") -> float:
        if which == "general":
            return self.peak_general
        if which == "matrix":
            if self.peak_matrix is None:
                raise ValueError(f"profile {self.name!r} has no matrix-unit peak")
            return self.peak_matrix
        raise ValueError("peak selector must be 'general' or 'matrix'")


def load_profile(path) -> HardwareProfile:
    """Parse a `key value` profile file; '#' starts a comment."""
    fields: dict[str, str] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition(" ")
            if not value.strip():
                raise ValueError(f"malformed profile line: {raw.rstrip()!r}")
            fields[key.strip()] = value.strip()
    try:
        return HardwareProfile(
            name=fields.get("name", "unnamed"),
            peak_general=float(fields["peak_general"]),
            bandwidth_measured=float(fields["bandwidth_measured"]),
            bandwidth_theoretical=float(fields["bandwidth_theoretical"]),
            peak_matrix=float(fields["peak_matrix"]) if "peak_matrix" in fields else None,
        )
    except KeyError as exc:
        raise ValueError(f"profile is missing the {exc.args[0]!r} entry") from None


def _preset_dir():
    return importlib.resources.files("hosfem") / "profiles"


def preset_names() -> list[str]:
    return sorted(p.name[:-4] for p in _preset_dir().iterdir() if p.name.endswith(".txt"))


def resolve_profile(name_or_path: str) -> HardwareProfile:
    """A preset name (see preset_names) or a path to a profile file."""
    preset = _preset_dir() / f"{name_or_path}.txt"
    if preset.is_file():
        with importlib.resources.as_file(preset) as real:
            return load_profile(real)
    try:
        return load_profile(name_or_path)
    except FileNotFoundError:
        raise ValueError(
            f"unknown profile {name_or_path!r}; presets: {', '.join(preset_names())}"
        ) from None


@dataclass(frozen=True)
class KernelModel:
    """Workload of one kernel launch (or one element, units cancel)."""

    f_ax: int
    f_geo: int
    m_bytes: int
    matrix_unit_flops: int = 0

    def __post_init__(self):
        if min(self.f_ax, self.f_geo, self.m_bytes) < 0:
            raise ValueError("workload terms must be nonnegative")
        if not 0 <= self.matrix_unit_flops <= self.f_ax + self.f_geo:
            raise ValueError("matrix-unit flops must not exceed the total flops")

    @classmethod
    def from_spec(
        cls,
        spec: KernelSpec,
        tensor_core: bool = False,
        include_dmat_traffic: bool | None = None,
    ) -> "KernelModel":
        """Model one element of a kernel.  tensor_core puts the r and s
        contractions on matrix units and, unless overridden, drops the
        differentiation-matrix traffic (kept in on-chip memory there)."""
        if include_dmat_traffic is None:
            include_dmat_traffic = not tensor_core
        wc = workload_count(spec, include_dmat_traffic=include_dmat_traffic)
        return cls(
            f_ax=wc.f_ax,
            f_geo=wc.f_geo,
            m_bytes=wc.m_bytes,
            matrix_unit_flops=matrix_unit_split(spec) if tensor_core else 0,
        )

    @property
    def intensity(self) -> float:
        """Total flops per byte of main-memory traffic."""
        return operational_intensity(self.f_ax + self.f_geo, self.m_bytes)


def operational_intensity(flops: float, m_bytes: float) -> float:
    if m_bytes <= 0:
        raise ValueError("memory traffic must be positive")
    return flops / m_bytes


def machine_balance(hw: HardwareProfile, which_peak: str = "general", bandwidth: str = "measured") -> float:
    """Flops per byte at which the device turns compute bound."""
    return hw.peak(which_peak) / hw.bandwidth(bandwidth)


@dataclass(frozen=True)
class RooflineBounds:
    t_cmp: float
    t_mem: float
    r_eff: float
    r_tot: float
    bound: str  # "memory" or "compute"


def roofline_bounds(model: KernelModel, hw: HardwareProfile, overlap: bool = False) -> RooflineBounds:
    """Attainable performance of the modelled kernel on the device."""
    t_mem = model.m_bytes / hw.bandwidth_measured
    general = model.f_ax + model.f_geo - model.matrix_unit_flops
    t_general = general / hw.peak_general
    if model.matrix_unit_flops:
        t_matrix = model.matrix_unit_flops / hw.peak("matrix")
        t_cmp = max(t_matrix, t_general) if overlap else t_matrix + t_general
    else:
        t_cmp = t_general
    t_bound = max(t_cmp, t_mem)
    if t_bound <= 0:
        raise ValueError("model has no work at all")
    return RooflineBounds(
        t_cmp=t_cmp,
        t_mem=t_mem,
        r_eff=model.f_ax / t_bound,
        r_tot=(model.f_ax + model.f_geo) / t_bound,
        bound="memory" if t_mem >= t_cmp else "compute",
    )


def measured_performance(f_ax: float, f_geo: float, t_measured: float):
    """(P_eff, P_tot) from a wall-clock measurement of one apply."""
    if t_measured <= 0:
        raise ValueError("measured time must be positive")
    return f_ax / t_measured, (f_ax + f_geo) / t_measured


def mbp_crossing(
    equation: Equation,
    n_col: int,
    hw: HardwareProfile,
    which_peak: str = "general",
    bandwidth: str = "measured",
    max_n1: int = 64,
) -> int | None:
    """Smallest n1 at which the stored-factor kernel turns compute bound.

    Scans the operational intensity of the baseline kernel against the
    machine balance; returns None when there is no crossing up to max_n1.
    """
    balance = machine_balance(hw, which_peak, bandwidth)
    for n1 in range(2, max_n1 + 1):
        intensity = ax_flops(equation, n_col, n1) / (
            stored_memory_reals(equation, n_col, n1) * FP_SIZE
        )
        if intensity >= balance:
            return n1
    return None
