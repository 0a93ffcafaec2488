"""Measure how many hidden units and samples an energy-based binary model
needs to reconstruct transverse-field Ising ground states.

The package provides exact ground-state oracles, a binary restricted
Boltzmann machine with contrastive-divergence training, a Monte Carlo
energy estimator with a confidence-interval convergence test, magnitude
pruning, spin-basis symmetry diagnostics, and sweep harnesses behind the
``rbmtomo`` command-line tool.
"""

__version__ = "0.1.0"

from .errors import CapacityError, ConfigError, CriterionError, NumericalError
from .tfim import (
    MAX_EXACT_QUBITS,
    GroundState,
    TfimSpec,
    free_fermion_energy,
    solve_ground_state,
)
from .data import (
    DatasetStats,
    MeasurementDataset,
    dataset_statistics,
    empirical_distribution,
    load_dataset,
    sample_measurements,
    save_dataset,
)
from .rbm import (
    MAX_ENUM_QUBITS,
    ExactRbmStats,
    RbmGradient,
    RbmParams,
    TrainConfig,
    amplitude_ratio,
    cd_gradient,
    config_energy,
    exact_distribution,
    exact_log_likelihood,
    exact_log_likelihood_gradient,
    free_energy,
    gibbs_step,
    init_params,
    kl_divergence,
    load_checkpoint,
    sample_model,
    save_checkpoint,
    train,
)
from .estimator import (
    DEFAULT_CONFIDENCE_C,
    DEFAULT_THRESHOLD,
    EnergyEstimate,
    ErrorBound,
    EstimatorConfig,
    estimate_energy,
    exact_rbm_energy,
    local_energy,
    relative_error_bound,
)
from .pruning import (
    PruneIteration,
    PruneReport,
    PruneSchedule,
    apply_prune,
    prune_loop,
    prune_threshold,
    select_prune_indices,
)
from .symmetry import (
    SpinRbm,
    SymmetryReport,
    bias_ratios,
    full_symmetry_report,
    spin_to_occupation,
    z2_invariance_check,
)
from .sweeps import (
    EvalRecord,
    LinearFit,
    SweepConfig,
    SweepRecord,
    SweepResult,
    TrainOutcome,
    derive_seed,
    linear_fit,
    minimal_from_records,
    sweep_hidden_units,
    sweep_sample_complexity,
    train_until_criterion,
    weight_spectrum,
)

__all__ = [
    "__version__",
    "CapacityError", "ConfigError", "CriterionError", "NumericalError",
    "MAX_EXACT_QUBITS", "GroundState", "TfimSpec",
    "free_fermion_energy", "solve_ground_state",
    "DatasetStats", "MeasurementDataset", "dataset_statistics",
    "empirical_distribution", "load_dataset", "sample_measurements", "save_dataset",
    "MAX_ENUM_QUBITS", "ExactRbmStats", "RbmGradient", "RbmParams", "TrainConfig",
    "amplitude_ratio", "cd_gradient", "config_energy", "exact_distribution",
    "exact_log_likelihood", "exact_log_likelihood_gradient", "free_energy",
    "gibbs_step", "init_params", "kl_divergence", "load_checkpoint",
    "sample_model", "save_checkpoint", "train",
    "DEFAULT_CONFIDENCE_C", "DEFAULT_THRESHOLD", "EnergyEstimate", "ErrorBound",
    "EstimatorConfig", "estimate_energy", "exact_rbm_energy", "local_energy",
    "relative_error_bound",
    "PruneIteration", "PruneReport", "PruneSchedule", "apply_prune",
    "prune_loop", "prune_threshold", "select_prune_indices",
    "SpinRbm", "SymmetryReport", "bias_ratios", "full_symmetry_report",
    "spin_to_occupation", "z2_invariance_check",
    "EvalRecord", "LinearFit", "SweepConfig", "SweepRecord", "SweepResult",
    "TrainOutcome", "derive_seed", "linear_fit", "minimal_from_records",
    "sweep_hidden_units", "sweep_sample_complexity", "train_until_criterion",
    "weight_spectrum",
]
