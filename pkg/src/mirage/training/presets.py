"""Named training recipes for the target models.

Full-scale recipes follow the published hyperparameters; ``*-desk``
recipes shrink them so a recipe trains in minutes on a 10k-image subset.
"""

from __future__ import annotations

from typing import Final

from pydantic import BaseModel, Field

from ..classifiers.config import ArchitectureConfig
from ..common.exceptions import ConfigError
from ..common.types import ArchitectureFamily, TrainingRegime
from .config import AdvTrainConfig, LrPhase, OptimizerKind, OptimizerSpec, TrainConfig

__all__ = ["ModelRecipe", "PRESETS", "get_preset"]


class ModelRecipe(BaseModel):
    """Architecture plus training regime of one target model."""

    architecture: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    adversarial: AdvTrainConfig | None = Field(
        default=None, description="Set for adversarially trained models."
    )

    @property
    def regime(self) -> TrainingRegime:
        return TrainingRegime.ATM if self.adversarial else TrainingRegime.TTM


def _sgd(*phases: tuple[int, float]) -> OptimizerSpec:
    return OptimizerSpec(
        kind=OptimizerKind.SGD_MOMENTUM,
        schedule=[LrPhase(epochs=e, lr=lr) for e, lr in phases],
        momentum=0.9,
        weight_decay=2e-4,
    )


def _adam(epochs: int, lr: float) -> OptimizerSpec:
    return OptimizerSpec(
        kind=OptimizerKind.ADAM,
        schedule=[LrPhase(epochs=epochs, lr=lr)],
        weight_decay=0.0,
    )


VGG: Final = ArchitectureConfig(family=ArchitectureFamily.VGG16_STYLE, dropout=0.5)
WRN_28_10: Final = ArchitectureConfig(depth=28, width=10)
WRN_16_2: Final = ArchitectureConfig(depth=16, width=2)

PRESETS: Final[dict[str, ModelRecipe]] = {
    "ttm-vgg": ModelRecipe(
        architecture=VGG,
        train=TrainConfig(optimizer=_adam(100, 1e-3), batch_size=128, epochs=100),
    ),
    "ttm-res": ModelRecipe(
        architecture=WRN_28_10,
        train=TrainConfig(optimizer=_sgd((100, 0.01)), batch_size=128, epochs=100),
    ),
    "atm-res": ModelRecipe(
        architecture=WRN_28_10,
        train=TrainConfig(
            optimizer=_sgd((100, 0.1), (50, 0.01), (50, 0.001)),
            batch_size=128,
            epochs=200,
            checkpoint_epochs=[10],
        ),
        adversarial=AdvTrainConfig(epsilon=10.0, step_size=2.0, attack_iterations=10),
    ),
    "ttm-vgg-desk": ModelRecipe(
        architecture=VGG,
        train=TrainConfig(optimizer=_adam(30, 1e-3), batch_size=128, epochs=30),
    ),
    "ttm-res-desk": ModelRecipe(
        architecture=WRN_16_2,
        train=TrainConfig(
            optimizer=_sgd((20, 0.05), (10, 0.005)), batch_size=128, epochs=30
        ),
    ),
    "atm-res-desk": ModelRecipe(
        architecture=WRN_16_2,
        train=TrainConfig(
            optimizer=_sgd((15, 0.1), (8, 0.01), (7, 0.001)),
            batch_size=128,
            epochs=30,
            checkpoint_epochs=[5],
        ),
        adversarial=AdvTrainConfig(epsilon=10.0, step_size=2.0, attack_iterations=10),
    ),
}


def get_preset(name: str) -> ModelRecipe:
    try:
        return PRESETS[name].model_copy(deep=True)
    except KeyError:
        raise ConfigError(
            f"Unknown model preset {name!r}; expected one of {sorted(PRESETS)}"
        ) from None
