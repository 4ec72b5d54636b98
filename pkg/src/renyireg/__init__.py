"""Robust estimation and inference for normal linear regression with fixed
design, built on the minimum Renyi-pseudodistance estimator.

The tuning parameter ``alpha >= 0`` trades efficiency for robustness:
``alpha = 0`` is exact maximum likelihood, larger values downweight
observations with large standardized residuals.
"""

__version__ = "0.1.0"

from .data import DatasetDescriptor, exclude_rows, load_csv, load_dataset
from .estimation import (
    CovarianceTriple,
    DesignDiagnostics,
    FitResult,
    SolverOptions,
    covariance_mlrm,
    design_diagnostics,
    fit_mle,
    fit_rp,
    fit_rp_path,
)
from .exceptions import (
    ConvergenceError,
    DecompositionError,
    DegenerateFitError,
    DomainError,
    NonFiniteIntegrandError,
)
from .inference import (
    LinearHypothesis,
    PowerReport,
    WaldOutcome,
    approx_power,
    contiguous_power,
    required_sample_size,
    wald_composite,
    wald_simple,
    wald_statistic,
    UNBOUNDED_SAMPLE_SIZE,
)
from .model import (
    DensityFamily,
    ModelData,
    NormalLinearFamily,
    QuadratureFamily,
    Theta,
    objective,
    rp_loss_single,
    score,
    v_weight,
)
from .numerics import (
    QuadratureRule,
    RngStream,
    adaptive_rule,
    chisq_quantile,
    chisq_sf,
    gauss_hermite_rule,
    integrate,
    min_eigenvalue,
    noncentral_chisq_sf,
    normal_cdf,
    normal_quantile,
    solve_spd,
)
from .robustness import (
    IFReport,
    IFRequest,
    UNBOUNDED_SENSITIVITY,
    are,
    gross_error_sensitivity,
    if2_composite,
    if2_simple,
    if_general,
    if_mlrm_closed,
)
from .simulation import (
    ContaminationSpec,
    DesignSpec,
    StudyConfig,
    StudyResult,
    contiguous_table,
    generate_data,
    make_design,
    run_study,
    write_study_csv,
    write_study_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
