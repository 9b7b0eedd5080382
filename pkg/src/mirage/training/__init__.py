"""Standard and adversarial training of the target models."""

from .adversarial import generate_adversarial_batch, iterated_sign_attack
from .config import AdvTrainConfig, LrPhase, OptimizerKind, OptimizerSpec, TrainConfig
from .metrics_log import EpochMetrics, MetricsLog
from .presets import PRESETS, ModelRecipe, get_preset
from .service import (
    TrainingOutcome,
    evaluate,
    evaluate_accuracy,
    train_adversarial,
    train_standard,
)

__all__ = [
    "AdvTrainConfig",
    "EpochMetrics",
    "LrPhase",
    "MetricsLog",
    "ModelRecipe",
    "OptimizerKind",
    "OptimizerSpec",
    "PRESETS",
    "TrainConfig",
    "TrainingOutcome",
    "evaluate",
    "evaluate_accuracy",
    "generate_adversarial_batch",
    "get_preset",
    "iterated_sign_attack",
    "train_adversarial",
    "train_standard",
]
