"""Filter-based and kernel-based regularisation for FIR impulse response estimation."""

from .errors import (
    DesignError,
    FactorizationError,
    FirRegError,
    ParameterError,
    SingularityError,
    TuningError,
)
from .estimator import (
    Dataset,
    ImpulseResponseEstimate,
    build_regressor,
    cost_value,
    least_squares,
    regularised_estimate,
    regularised_estimate_filter,
)
from .filters import (
    BandKind,
    BandSpec,
    FirDesign,
    SystemSpec,
    build_regularisation_filter_matrix,
    design_cheby1,
    design_fir_windowed,
    filter_signal,
    frequency_response,
    impulse_response,
)
from .kernels import (
    KernelFamily,
    KernelSpec,
    build_covariance,
    build_filter_factor_closed_form,
    build_regularisation_closed_form,
    factorize_rotated,
    row_frequency_response,
)
from .simulation import (
    BENCHMARKS,
    ExperimentConfig,
    coefficient_mse,
    generate_white_gaussian,
    make_benchmark_system,
    make_dataset,
    validation_mse,
)
from .tuning import (
    GridSpec,
    HyperparameterVector,
    TuningResult,
    cv_score,
    grid_search,
    kfold_split,
    marginal_likelihood_objective,
    marginal_likelihood_tune,
    default_filter_grid,
    refine_local,
    tune_kernel_cv,
)

__version__ = "0.1.0"
