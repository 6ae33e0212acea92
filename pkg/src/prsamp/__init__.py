"""Phase retrieval by swept approximate message passing (prSAMP)."""

from .channels import (
    ChannelResult,
    DenoiserResult,
    awgn_channel,
    bessel_ratio,
    binary_denoise,
    gaussian_denoise,
    rician_channel,
)
from .model import (
    BinaryPrior,
    ChannelSpec,
    ComplexSignal,
    GaussianPrior,
    MeasurementMatrix,
    ProblemInstance,
    SolverConfig,
    SolverState,
    TrialRecord,
    validate,
)
from .solver import (
    PRESETS,
    calibration_config,
    recovery_config,
    solve_once,
    solve_with_restarts,
)

__all__ = [
    "BinaryPrior",
    "ChannelResult",
    "ChannelSpec",
    "ComplexSignal",
    "DenoiserResult",
    "GaussianPrior",
    "MeasurementMatrix",
    "PRESETS",
    "ProblemInstance",
    "SolverConfig",
    "SolverState",
    "TrialRecord",
    "awgn_channel",
    "bessel_ratio",
    "binary_denoise",
    "calibration_config",
    "gaussian_denoise",
    "recovery_config",
    "rician_channel",
    "solve_once",
    "solve_with_restarts",
    "validate",
]
