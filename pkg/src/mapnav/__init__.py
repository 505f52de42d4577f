"""Design space mapping and navigation.

Sample a decision space with a low-discrepancy sequence, simulate the
samples, screen the influential inputs, fit a binned belief network over
them, and query it in both directions: forward from settings to expected
performance, backward from performance targets to recommended settings.
"""
from .space import CATEGORICAL, CONTINUOUS, DesignSpace, VariableSpec
from .sobol import SamplePlan, SobolSequence, sample, unit_samples
from .simulator import GroundTruthModel, SyntheticEnergyModel, get_simulator
from .discretize import (
    CategoricalBins,
    ContinuousBins,
    DegenerateBinningError,
    DiscretizationScheme,
    fit_equal_frequency,
    fit_equal_width,
)
from .sensitivity import (
    SaltelliPlan,
    ScreeningReport,
    SensitivityResult,
    estimate_indices,
    saltelli_matrices,
    select_top_k,
)
from .bbn import (
    BbnModel,
    BbnStructure,
    Evidence,
    InconsistentEvidenceError,
    ModelFormatError,
    StateSpaceTooLargeError,
    fit,
    infer,
    joint_probability,
    load_model,
    most_probable_configuration,
    navigate,
    save_model,
)
from .linear import (
    ConvergenceError,
    JacobianResult,
    LinearStep,
    PinvResult,
    SvdResult,
    estimate_jacobian,
    jacobi_svd,
    navigate_linear,
    network_function,
    pseudo_inverse,
    simulator_function,
)
from .validation import (
    ValidationReport,
    cross_validate,
    make_folds,
    mape,
    mean_prediction_accuracy,
    nrmse,
    prediction_accuracy,
)
from .data import Dataset
from .pipeline import (
    PipelineConfig,
    PipelineError,
    PipelineResult,
    SparseTrainingWarning,
    config_hash,
    run_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "CATEGORICAL",
    "CONTINUOUS",
    "DesignSpace",
    "VariableSpec",
    "SamplePlan",
    "SobolSequence",
    "sample",
    "unit_samples",
    "GroundTruthModel",
    "SyntheticEnergyModel",
    "get_simulator",
    "CategoricalBins",
    "ContinuousBins",
    "DegenerateBinningError",
    "DiscretizationScheme",
    "fit_equal_frequency",
    "fit_equal_width",
    "SaltelliPlan",
    "ScreeningReport",
    "SensitivityResult",
    "estimate_indices",
    "saltelli_matrices",
    "select_top_k",
    "BbnModel",
    "BbnStructure",
    "Evidence",
    "InconsistentEvidenceError",
    "ModelFormatError",
    "StateSpaceTooLargeError",
    "fit",
    "infer",
    "joint_probability",
    "load_model",
    "most_probable_configuration",
    "navigate",
    "save_model",
    "ConvergenceError",
    "JacobianResult",
    "LinearStep",
    "PinvResult",
    "SvdResult",
    "estimate_jacobian",
    "jacobi_svd",
    "navigate_linear",
    "network_function",
    "pseudo_inverse",
    "simulator_function",
    "ValidationReport",
    "cross_validate",
    "make_folds",
    "mape",
    "mean_prediction_accuracy",
    "nrmse",
    "prediction_accuracy",
    "Dataset",
    "PipelineConfig",
    "PipelineError",
    "PipelineResult",
    "SparseTrainingWarning",
    "config_hash",
    "run_pipeline",
]
