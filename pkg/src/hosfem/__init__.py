"""Matrix-free high-order spectral-element operators on hexahedral meshes.

The package provides the one-dimensional spectral machinery (collocation
points, quadrature weights, differentiation matrix), hexahedral mesh and
geometry handling with several interchangeable geometric-factor strategies,
the batched local operator kernel for Poisson and Helmholtz with optional
coefficient fields, exact per-element work and traffic counts, a time-based
roofline model, and a conjugate-gradient mini-benchmark.
"""

from .axlocal import (
    Equation,
    FactorSource,
    KernelSpec,
    LocalOperator,
    ax_local_apply,
    dense_local_matrix,
)
from .basis import SpectralBasis, gll_points, gll_weights, legendre_and_derivative
from .contractions import apply_gradient, contract_r, contract_s, contract_t, gradient_matrices
from .geometry import (
    GeometricFactorSet,
    GeometryError,
    ParallelepipedFactors,
    discrete_jacobians,
    factors_from_jacobians,
    jacobi_to_geo,
    parallelepiped_setup,
    recompute_parallelepiped,
    recompute_trilinear,
    trilinear_factors,
    trilinear_jacobian_analytic,
)
from .mesh import (
    Element,
    ElementKind,
    LocalField,
    Mesh,
    MeshFormatError,
    boundary_node_mask,
    box_mesh,
    gather,
    load_mesh,
    make_element,
    save_mesh,
    scatter_add,
)
from .roofline import (
    HardwareProfile,
    KernelModel,
    RooflineBounds,
    load_profile,
    machine_balance,
    mbp_crossing,
    measured_performance,
    operational_intensity,
    preset_names,
    resolve_profile,
    roofline_bounds,
)
from .solver import (
    CgReport,
    GlobalOperator,
    NekboneConfig,
    NekboneResult,
    cg_solve,
    global_node_coords,
    nekbone_benchmark,
)
from .workload import FP_SIZE, WorkloadCount, matrix_unit_split, workload_count

__version__ = "0.1.0"

__all__ = [
    "Equation",
    "FactorSource",
    "KernelSpec",
    "LocalOperator",
    "ax_local_apply",
    "dense_local_matrix",
    "SpectralBasis",
    "gll_points",
    "gll_weights",
    "legendre_and_derivative",
    "apply_gradient",
    "contract_r",
    "contract_s",
    "contract_t",
    "gradient_matrices",
    "GeometricFactorSet",
    "GeometryError",
    "ParallelepipedFactors",
    "discrete_jacobians",
    "factors_from_jacobians",
    "jacobi_to_geo",
    "parallelepiped_setup",
    "recompute_parallelepiped",
    "recompute_trilinear",
    "trilinear_factors",
    "trilinear_jacobian_analytic",
    "Element",
    "ElementKind",
    "LocalField",
    "Mesh",
    "MeshFormatError",
    "boundary_node_mask",
    "box_mesh",
    "gather",
    "load_mesh",
    "make_element",
    "save_mesh",
    "scatter_add",
    "HardwareProfile",
    "KernelModel",
    "RooflineBounds",
    "load_profile",
    "machine_balance",
    "mbp_crossing",
    "measured_performance",
    "operational_intensity",
    "preset_names",
    "resolve_profile",
    "roofline_bounds",
    "CgReport",
    "GlobalOperator",
    "NekboneConfig",
    "NekboneResult",
    "cg_solve",
    "global_node_coords",
    "nekbone_benchmark",
    "FP_SIZE",
    "WorkloadCount",
    "matrix_unit_split",
    "workload_count",
    "__version__",
]
