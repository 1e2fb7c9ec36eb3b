"""Coarse-grained harmonic transition state theory for a strained atomic chain.

The package builds the saddle-point Hessian of a 1-D fracture chain,
eliminates constrained atoms by a Schur complement, and measures how far
the coarse transition rate is from the atomistic one.
"""

from ._kernels import BACKEND
from .chain import (
    ChainSystem,
    PotentialParams,
    central_bond_energy,
    gradient,
    hessian,
    hessian_bands,
    spring_energy,
    total_energy,
)
from .coarse import (
    SCHEMES,
    CoarseHessian,
    PartitionedHessian,
    RepatomSet,
    delocalized_indices,
    delocalized_minimal_indices,
    embed_min,
    localized_indices,
    mesh,
    partition_hessian,
    relaxed_response,
    schur_complement,
)
from .errors import (
    ChainDomainError,
    ConvergenceError,
    DegenerateOverlapError,
    RateOverflowError,
    RepatomRegionError,
    SaddleSearchError,
    SpectrumError,
)
from .rates import (
    ErrorBreakdown,
    LogPartition,
    ModePair,
    RateParams,
    coarse_kinetic_constant,
    coarse_saddle_free_energy,
    error_decomposition,
    htst_rate,
    log_htst_rate,
    log_partition,
    log_z_basin,
    log_z_saddle_atomistic,
    log_z_saddle_coarse,
    mode_pair,
    relative_rate_error,
    unstable_mode,
)
from .stationary import (
    AnalyticEigenmode,
    PolynomialRoot,
    StationaryPoint,
    analytic_eigenmode,
    analytic_unstable_eigenvalue,
    analytic_unstable_mode,
    find_minimum,
    find_saddle_analytic,
    find_saddle_drag,
    force_balance,
    saddle_polynomial_roots,
)
from .sweep import (
    CSV_HEADER,
    SweepConfig,
    SweepRow,
    analyze_mesh,
    emit_csv,
    load_config_file,
    prepare_saddle,
    read_csv,
    run_sweep,
)
from .verify import CheckResult, VerificationReport, verify_suite

__version__ = "0.1.0"
