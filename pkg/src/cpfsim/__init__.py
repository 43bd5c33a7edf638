"""cpfsim: conditional past-future correlations for qubit decay into a
bosonic bath.

The conditional past-future (CPF) correlation of three successive
projective measurements witnesses quantum memory through the two-time
convolution G2(t, tau) of the propagator with the bath correlation, and
can therefore stay nonzero even where every propagator-based witness
(positive decay rate, monotonic survival) declares the dynamics
Markovian. This package computes it exactly (Volterra solutions and
Lorentzian closed forms), operationally (channel-map enumeration), and
experimentally (finite-count and visibility noise simulation).
"""
from ._backend import USING_EXTENSION, backend_name
from .bath import (
    BathKernel,
    LorentzianKernel,
    TabulatedKernel,
    eval_kernel,
    eval_kernel_grid,
    load_kernel_csv,
    markovian_limit_kernel,
)
from .channel import (
    ChannelAngles,
    JointState,
    angles_from_propagator,
    apply_U_t,
    apply_U_tau,
    conditional_table,
    prepare_joint,
    project,
    simulate_sequence,
)
from .cpf import (
    CpfResult,
    InitialState,
    MeasurementScheme,
    ProbabilityTable,
    build_table,
    build_table_xzx,
    build_table_yzy,
    build_table_zzz,
    cpf_closed_form,
    cpf_from_table,
    cpf_xzx,
    cpf_y_plus,
    cpf_yzy,
    cpf_zzz,
)
from .experiment import (
    CountsTable,
    ExperimentConfig,
    NoisePoint,
    apply_visibility,
    estimate_cpf,
    run_noise_study,
    sample_counts,
)
from .propagator import (
    DensityMatrix,
    PropagatorGrid,
    RateFunctions,
    TwoTimeGrid,
    backflow_probabilities,
    compute_G_two_time,
    lorentzian_G,
    lorentzian_G_two_time,
    rates_from_G,
    rho_t,
    solve_volterra,
)

__version__ = "0.1.0"

__all__ = [
    "BathKernel",
    "ChannelAngles",
    "CountsTable",
    "CpfResult",
    "DensityMatrix",
    "ExperimentConfig",
    "InitialState",
    "JointState",
    "LorentzianKernel",
    "MeasurementScheme",
    "NoisePoint",
    "ProbabilityTable",
    "PropagatorGrid",
    "RateFunctions",
    "TabulatedKernel",
    "TwoTimeGrid",
    "USING_EXTENSION",
    "angles_from_propagator",
    "apply_U_t",
    "apply_U_tau",
    "apply_visibility",
    "backend_name",
    "backflow_probabilities",
    "build_table",
    "build_table_xzx",
    "build_table_yzy",
    "build_table_zzz",
    "compute_G_two_time",
    "conditional_table",
    "cpf_closed_form",
    "cpf_from_table",
    "cpf_xzx",
    "cpf_y_plus",
    "cpf_yzy",
    "cpf_zzz",
    "estimate_cpf",
    "eval_kernel",
    "eval_kernel_grid",
    "load_kernel_csv",
    "lorentzian_G",
    "lorentzian_G_two_time",
    "markovian_limit_kernel",
    "prepare_joint",
    "project",
    "rates_from_G",
    "rho_t",
    "run_noise_study",
    "sample_counts",
    "simulate_sequence",
    "solve_volterra",
]
