from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, Field, model_validator

__all__ = ["AdvTrainConfig", "LrPhase", "OptimizerKind", "OptimizerSpec", "TrainConfig"]


class OptimizerKind(str, Enum):
    ADAM = "adam"
    SGD_MOMENTUM = "sgd_momentum"


class LrPhase(BaseModel):
    """A constant learning rate held for a number of epochs."""

    epochs: int = Field(..., ge=1)
    lr: float = Field(..., gt=0)


class OptimizerSpec(BaseModel):
    kind: OptimizerKind = Field(default=OptimizerKind.SGD_MOMENTUM)
    schedule: list[LrPhase] = Field(
        default_factory=lambda: [LrPhase(epochs=30, lr=0.01)],
        min_length=1,
        description="Piecewise-constant learning-rate schedule.",
    )
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=2e-4, ge=0.0)

    @property
    def total_epochs(self) -> int:
        return sum(phase.epochs for phase in self.schedule)

    def lr_at(self, epoch: int) -> float:
        """Learning rate for the zero-based ``epoch``."""
        boundary = 0
        for phase in self.schedule:
            boundary += phase.epochs
            if epoch < boundary:
                return phase.lr
        return self.schedule[-1].lr


class TrainConfig(BaseModel):
    """Optimizer, batching and reproducibility settings of one training run."""

    optimizer: OptimizerSpec = Field(default_factory=OptimizerSpec)
    batch_size: int = Field(default=128, ge=1)
    epochs: int = Field(default=30, ge=1)
    seed: int = Field(default=0)
    augment: bool = Field(
        default=False,
        description="Random crop (pad 4) and horizontal flip of training batches.",
    )
    checkpoint_epochs: list[int] = Field(
        default_factory=list,
        description="Epochs after which an intermediate checkpoint is emitted.",
    )
    progress: bool = Field(default=True, description="Show tqdm progress bars.")

    @model_validator(mode="after")
    def validate_schedule(self) -> TrainConfig:
        if self.optimizer.total_epochs != self.epochs:
            raise ValueError(
                f"Learning-rate schedule covers {self.optimizer.total_epochs} epochs "
                f"but total epochs is {self.epochs}"
            )
        return self


class AdvTrainConfig(BaseModel):
    """Inner iterated sign-gradient attack of adversarial training (pixel counts)."""

    epsilon: float = Field(default=10.0, ge=0.0, le=255.0)
    step_size: float = Field(default=2.0, ge=0.0)
    attack_iterations: int = Field(default=10, ge=1)
    random_start: bool = Field(default=False)

    @model_validator(mode="after")
    def validate_step(self) -> AdvTrainConfig:
        if self.step_size > self.epsilon:
            raise ValueError(
                f"step_size ({self.step_size}) must not exceed epsilon ({self.epsilon})"
            )
        return self
