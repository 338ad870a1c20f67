"""Polarization optics model of the three-time interferometer experiment."""
from .experiment import (
    NoiseModel,
    SimResult,
    ScheduleError,
    mzi_amplitude,
    outcome_probability,
    run_ghz_experiment,
    simulate_trial,
)
from .jones import CONVENTIONS, pbs_apply, waveplate_matrix
from .trials import (
    StageSpec,
    TableError,
    TrialConfig,
    TrialMap,
    load_trial_table,
    validate_convention,
)

__all__ = [
    "CONVENTIONS",
    "NoiseModel",
    "ScheduleError",
    "SimResult",
    "StageSpec",
    "TableError",
    "TrialConfig",
    "TrialMap",
    "load_trial_table",
    "mzi_amplitude",
    "outcome_probability",
    "pbs_apply",
    "run_ghz_experiment",
    "simulate_trial",
    "validate_convention",
    "waveplate_matrix",
]
