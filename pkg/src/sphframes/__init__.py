"""Zonal wavelet frames on the n-sphere.

Zonal wavelet families with explicit spectral profiles, admissibility and
localization diagnostics, cube-projection partitions and phase-space grids,
and frame bounds / reconstruction for bandlimited functions.  Hot series
kernels run in a compiled extension when available (see
:mod:`sphframes.backend`).
"""

__version__ = "0.1.0"

from .backend import BACKEND, COMPILED
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    NumericError,
    SphframesError,
)
from .special import (
    Dimension,
    QuadratureRule,
    gauss_jacobi,
    gegenbauer,
    gegenbauer_coefficient,
    gegenbauer_dtheta,
    gegenbauer_sq_norm,
    harmonic_dim,
    surface_measure,
    zonal_kernel,
)
from .families import (
    WaveletFamily,
    admissibility_integral,
    eval_gradient,
    eval_zonal,
    gamma_tv,
    localization_scan,
    make_family,
    poisson_kernel,
    poisson_kernel_series,
    poisson_multipole_oracle,
)
from .kernel import (
    KernelSpec,
    kernel_closed,
    kernel_localization_scan,
    kernel_series,
)
from .scales import ScaleSequence, make_scales
from .sphere import (
    BallPoint,
    Partition,
    PhaseSpaceGrid,
    build_partition,
    build_phase_grid,
    cell_measure,
    density_check,
    geodesic_distance,
    hyperbolic_distance,
    locate_cell,
    read_grid,
    sample_uniform,
    write_grid,
)
from .frames import (
    BandFunction,
    FrameReport,
    band_dimension,
    band_kernel,
    frame_bounds_eig,
    frame_bounds_mc,
    frame_quotient,
    gram_matrix,
    reconstruct,
    semiframe_bounds,
)

__all__ = [
    "__version__",
    "BACKEND",
    "COMPILED",
    "SphframesError",
    "ConfigurationError",
    "DomainError",
    "NumericError",
    "DegenerateInputError",
    "Dimension",
    "QuadratureRule",
    "gauss_jacobi",
    "gegenbauer",
    "gegenbauer_coefficient",
    "gegenbauer_dtheta",
    "gegenbauer_sq_norm",
    "harmonic_dim",
    "surface_measure",
    "zonal_kernel",
    "WaveletFamily",
    "make_family",
    "eval_zonal",
    "eval_gradient",
    "admissibility_integral",
    "gamma_tv",
    "localization_scan",
    "poisson_kernel",
    "poisson_kernel_series",
    "poisson_multipole_oracle",
    "KernelSpec",
    "kernel_closed",
    "kernel_series",
    "kernel_localization_scan",
    "ScaleSequence",
    "make_scales",
    "Partition",
    "build_partition",
    "locate_cell",
    "cell_measure",
    "geodesic_distance",
    "sample_uniform",
    "PhaseSpaceGrid",
    "build_phase_grid",
    "write_grid",
    "read_grid",
    "BallPoint",
    "hyperbolic_distance",
    "density_check",
    "BandFunction",
    "band_dimension",
    "band_kernel",
    "gram_matrix",
    "semiframe_bounds",
    "frame_quotient",
    "FrameReport",
    "frame_bounds_mc",
    "frame_bounds_eig",
    "reconstruct",
]
