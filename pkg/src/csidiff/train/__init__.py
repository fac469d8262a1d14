from .gradcheck import GradCheckResult, LinearLatentModel, gradient_check
from .loop import (
    EarlyStopper,
    EpochRecord,
    ProtocolResult,
    TrainConfig,
    TrainData,
    TrainReport,
    evaluate_mse,
    run_protocol,
    train_model,
)
from .targets import LatentTargets, normalized_inputs, precompute_latent_targets

__all__ = [
    "EarlyStopper",
    "EpochRecord",
    "GradCheckResult",
    "LatentTargets",
    "LinearLatentModel",
    "ProtocolResult",
    "TrainConfig",
    "TrainData",
    "TrainReport",
    "evaluate_mse",
    "gradient_check",
    "normalized_inputs",
    "precompute_latent_targets",
    "run_protocol",
    "train_model",
]
