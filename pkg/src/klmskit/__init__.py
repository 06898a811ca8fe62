"""Online kernel LMS with coherence-sparsified dictionaries, l1/reweighted-l1
dictionary pruning, and an analytical transient/steady-state MSE model for
the fixed-dictionary filter under Gaussian inputs."""

from .cli import run_experiment
from .config import ConfigError, ExperimentConfig, load_config, validate_config
from .estimators import FOBOSKLMSRegressor, KLMSRegressor
from .fobos import (
    RegularizerSpec,
    StabilityBound,
    fobos_klms_step,
    prox_adaptive_l1,
    prox_l1,
    stability_bound,
)
from .kernels import as_centers, gaussian_kernel, kernel_vector
from .klms import FilterState, StepOutcome, coherence_admit, klms_step, predict
from .model import (
    ModelCurve,
    SegmentAnalysis,
    TransientModel,
    build_g,
    convergence_iteration,
    convergence_iteration_closed,
    cv_trajectory,
    ensemble_moments,
    estimate_moments,
    kernelized_moments,
    mean_weight_trajectory,
    moment_averages,
    mse_curve,
    mse_curve_closed,
    segment_analysis,
    steady_state,
    to_db,
    transient_model,
    wiener_and_jmin,
)
from .moments import (
    DictionaryStatistics,
    KernelizedMoments,
    compute_k_entry,
    compute_rkk,
    k_tensor,
    quadratic_mgf,
)
from .simulate import (
    McResult,
    RegimeSchedule,
    SystemModel,
    draw_dictionary,
    fixed_dictionary_klms_run,
    generate_input,
    learned_dictionary_run,
    monte_carlo,
    system_response,
)

__version__ = "0.1.0"

__all__ = [
    "FilterState",
    "StepOutcome",
    "coherence_admit",
    "klms_step",
    "predict",
    "gaussian_kernel",
    "kernel_vector",
    "as_centers",
    "RegularizerSpec",
    "StabilityBound",
    "prox_l1",
    "prox_adaptive_l1",
    "fobos_klms_step",
    "stability_bound",
    "DictionaryStatistics",
    "KernelizedMoments",
    "quadratic_mgf",
    "compute_rkk",
    "compute_k_entry",
    "k_tensor",
    "TransientModel",
    "ModelCurve",
    "SegmentAnalysis",
    "moment_averages",
    "estimate_moments",
    "ensemble_moments",
    "wiener_and_jmin",
    "kernelized_moments",
    "mean_weight_trajectory",
    "build_g",
    "transient_model",
    "cv_trajectory",
    "steady_state",
    "mse_curve",
    "mse_curve_closed",
    "convergence_iteration",
    "convergence_iteration_closed",
    "segment_analysis",
    "to_db",
    "SystemModel",
    "RegimeSchedule",
    "McResult",
    "generate_input",
    "system_response",
    "draw_dictionary",
    "fixed_dictionary_klms_run",
    "learned_dictionary_run",
    "monte_carlo",
    "ExperimentConfig",
    "ConfigError",
    "validate_config",
    "load_config",
    "run_experiment",
    "KLMSRegressor",
    "FOBOSKLMSRegressor",
    "__version__",
]
