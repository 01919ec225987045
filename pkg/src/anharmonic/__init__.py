"""Certified eigenvalue bounds for the quartic anharmonic oscillator.

The solver brackets each energy level between a rigorously classified lower
bound (nodal count plus sink entry of the logarithmic-derivative flow) and
upper bound (excess node), then shrinks the bracket to a requested gap using
accelerated Newton steps on the zero-entrance function and verified bisection.
All arithmetic runs on arbitrary-precision reals with running significance
tracking.
"""

from .numerics import BigReal, PrecisionContext, significance_of, sqrt, with_precision
from .model import (
    BENCHMARK_PARAMS,
    Parity,
    PotentialParams,
    TrialEnergy,
    potential,
    turning_point,
    wkb_curve,
)
from .series import (
    SeriesState,
    TailEstimate,
    build_series,
    conservation_residual,
    dump_coefficients,
    eval_K,
    eval_dKdE,
    eval_density,
    eval_ratio,
    find_zeros,
    residue_at_zero,
    riccati_residual,
)
from .classify import Classification, LevelTarget, Verdict, classify_energy, sink_entry
from .solver import (
    CertifiedLevel,
    SolverConfig,
    SolverError,
    bracket_level,
    refine_level,
    solve_spectrum,
)
from .oracle import OracleSpectrum, rayleigh_ritz, shooting_check

__version__ = "0.1.0"

__all__ = [
    "BigReal",
    "PrecisionContext",
    "with_precision",
    "significance_of",
    "sqrt",
    "PotentialParams",
    "TrialEnergy",
    "Parity",
    "BENCHMARK_PARAMS",
    "potential",
    "turning_point",
    "wkb_curve",
    "SeriesState",
    "TailEstimate",
    "build_series",
    "eval_K",
    "eval_dKdE",
    "eval_density",
    "eval_ratio",
    "find_zeros",
    "residue_at_zero",
    "riccati_residual",
    "conservation_residual",
    "dump_coefficients",
    "Classification",
    "LevelTarget",
    "Verdict",
    "classify_energy",
    "sink_entry",
    "SolverConfig",
    "CertifiedLevel",
    "SolverError",
    "bracket_level",
    "refine_level",
    "solve_spectrum",
    "OracleSpectrum",
    "rayleigh_ritz",
    "shooting_check",
]
