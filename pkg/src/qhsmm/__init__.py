"""Classical and quantum memory costs of coarse-grained hidden semi-Markov processes."""

from .classical import (
    CausalPartition,
    FutureTable,
    entropy_bits,
    future_table,
    merge_equivalent,
    statistical_complexity,
)
from .discretize import DiscretizedProcess, Grid, discretize, refine, sweep
from .dwell import Exponential, PiecewiseConstant, Tabulated, Uniform, dwell_from_dict
from .io import load_model, loads_model, model_hash, resolve_source
from .process import (
    EeHsmm,
    ModeStats,
    Transition,
    build_example_process,
    build_poisson_process,
    conditional_future,
    mode_stats,
    psi,
    stationary_distribution,
    steady_state_density,
    survival,
    validate,
)
from .quantum import (
    Qms,
    QmsEnsemble,
    build_ensemble,
    build_gram,
    build_qms,
    build_qms_continuous_emission,
    condition_on_no_emission,
    deduplicate,
    overlap,
)
from .sampler import Trajectory, empirical_dwell_check, qms_measurement_sample, sample_trajectory
from .spectrum import GramSpectrum, TailFit, density_matrix_direct, eigen_spectrum, quantum_memory, tail_fit

__version__ = "0.1.0"

__all__ = [
    "CausalPartition",
    "DiscretizedProcess",
    "EeHsmm",
    "Exponential",
    "FutureTable",
    "GramSpectrum",
    "Grid",
    "ModeStats",
    "PiecewiseConstant",
    "Qms",
    "QmsEnsemble",
    "Tabulated",
    "TailFit",
    "Trajectory",
    "Transition",
    "Uniform",
    "build_ensemble",
    "build_example_process",
    "build_gram",
    "build_poisson_process",
    "build_qms",
    "build_qms_continuous_emission",
    "condition_on_no_emission",
    "conditional_future",
    "deduplicate",
    "density_matrix_direct",
    "discretize",
    "dwell_from_dict",
    "eigen_spectrum",
    "empirical_dwell_check",
    "entropy_bits",
    "future_table",
    "load_model",
    "loads_model",
    "merge_equivalent",
    "mode_stats",
    "model_hash",
    "overlap",
    "psi",
    "qms_measurement_sample",
    "quantum_memory",
    "refine",
    "resolve_source",
    "sample_trajectory",
    "stationary_distribution",
    "statistical_complexity",
    "steady_state_density",
    "survival",
    "sweep",
    "tail_fit",
    "validate",
]
