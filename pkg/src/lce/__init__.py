"""lce: noise-activated escape across an unstable limit cycle.

Monte Carlo escape ensembles (Euler-Maruyama with absorption on the unit
circle, reproducible counter-based noise streams) and the matching spectral
asymptotics (periodic Bernoulli boundary layer, complex eigenvalue ladder,
mean first passage time, exit-point density), plus analysis utilities that
compare the two.
"""

__version__ = "0.1.0"

from .fields import (
    BoundaryData,
    FieldSpec,
    boundary_components,
    drift,
    linearization_at_focus,
    sample_boundary,
)
from .engine import (
    EnsembleResult,
    ExitRecord,
    SimConfig,
    read_ensemble,
    run_ensemble,
    run_trajectory,
    step,
    trajectory_path,
    write_ensemble,
)
from .spectral import (
    ExitDensity,
    SolverError,
    Spectrum,
    XiSolution,
    boundary_layer_Q0,
    c_of_omega,
    compute_spectrum,
    eigenvalues,
    exit_density,
    exit_density_closed_form,
    exit_density_l1_distance,
    hopf_barrier,
    mfpt,
    mfpt_hopf_closed_form,
    omega_tilde,
    radial_eigenfunction_R,
    riccati_H,
    solve_bernoulli_periodic,
    tangential_factor_T,
)
from .analysis import (
    AnalysisReport,
    FitParams,
    Histogram,
    WindingStats,
    analyze_records,
    build_histogram,
    compare_exit_density,
    detect_peak_period,
    fit_single_exponential,
    fit_two_exponential,
    model_exit_time_density,
    survival_curve,
    winding_statistics,
)

__all__ = [
    "__version__",
    "FieldSpec", "BoundaryData", "drift", "boundary_components",
    "sample_boundary", "linearization_at_focus",
    "SimConfig", "ExitRecord", "EnsembleResult", "step", "run_trajectory",
    "run_ensemble", "trajectory_path", "write_ensemble", "read_ensemble",
    "SolverError", "XiSolution", "Spectrum", "ExitDensity",
    "solve_bernoulli_periodic", "omega_tilde", "eigenvalues", "riccati_H",
    "mfpt", "c_of_omega", "hopf_barrier", "mfpt_hopf_closed_form",
    "compute_spectrum", "exit_density", "exit_density_closed_form",
    "exit_density_l1_distance", "boundary_layer_Q0",
    "radial_eigenfunction_R", "tangential_factor_T",
    "Histogram", "FitParams", "WindingStats", "AnalysisReport",
    "build_histogram", "survival_curve", "detect_peak_period",
    "fit_two_exponential", "fit_single_exponential", "winding_statistics",
    "compare_exit_density", "model_exit_time_density", "analyze_records",
]
