from __future__ import annotations

from enum import Enum
from typing import Final

from pydantic import BaseModel, Field

from ..common.types import InitMode

__all__ = [
    "DreamConfig",
    "GanInversionConfig",
    "InitSpec",
    "NoiseDistribution",
    "PgdInversionConfig",
    "TARGET_WEIGHT_SWEEP",
]

# Exploratory weights on the target-model class loss of the GAN attack.
TARGET_WEIGHT_SWEEP: Final = (0.0, 0.5, 1.0, 2.0, 10.0)


class NoiseDistribution(str, Enum):
    UNIFORM = "uniform"
    NORMAL = "normal"


class InitSpec(BaseModel):
    """Starting image of an input-space attack."""

    mode: InitMode = Field(default=InitMode.GRAY)
    gray_value: float = Field(default=128.0, ge=0.0, le=255.0)
    random_mean: float = Field(default=128.0, ge=0.0, le=255.0)
    random_spread: float = Field(
        default=32.0,
        ge=0.0,
        description="Half-width (uniform) or standard deviation (normal) in pixels.",
    )
    random_distribution: NoiseDistribution = Field(default=NoiseDistribution.UNIFORM)


class PgdInversionConfig(BaseModel):
    """Plain clipped gradient ascent on one class activation."""

    target_class: int = Field(default=0, ge=0)
    init: InitSpec = Field(default_factory=InitSpec)
    lr: float | None = Field(
        default=None,
        gt=0.0,
        description=(
            "Pixel counts per unit gradient. When unset, calibrated on the first "
            "step so the largest pixel change is `calibration_step`."
        ),
    )
    calibration_step: float = Field(default=1.0, gt=0.0)
    max_iterations: int = Field(default=1000, ge=0)
    record_trajectory: bool = Field(default=True)
    seed: int = Field(default=0)


class DreamConfig(BaseModel):
    """Multi-scale normalized-gradient ascent with a smoothness penalty."""

    target_class: int = Field(default=0, ge=0)
    init: InitSpec = Field(default_factory=InitSpec)
    octaves: int = Field(default=4, ge=1)
    octave_scale: float = Field(default=2.0, gt=1.0)
    steps_per_octave: int = Field(default=10, ge=0)
    outer_iterations: int = Field(default=5, ge=1)
    lr: float = Field(
        default=1.0,
        gt=0.0,
        description="Pixel counts per step of the mean-|G| normalized gradient.",
    )
    tv_weight: float | None = Field(
        default=None,
        ge=0.0,
        description="Total-variation weight; calibrated at init when unset.",
    )
    record_trajectory: bool = Field(default=True)
    keep_octave_images: bool = Field(default=False)
    seed: int = Field(default=0)

    @property
    def total_steps(self) -> int:
        return self.outer_iterations * self.octaves * self.steps_per_octave


class GanInversionConfig(BaseModel):
    """Conditional GAN trained against shadow data and the frozen target model."""

    lr: float = Field(default=2e-4, gt=0.0)
    betas: tuple[float, float] = Field(default=(0.5, 0.999))
    batch_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=20, ge=1)
    noise_dim: int = Field(default=100, ge=1)
    target_class_weight: float = Field(
        default=1.0,
        ge=0.0,
        description="Weight of the target model's class loss in the generator loss.",
    )
    generator_width: int = Field(default=64, ge=1)
    discriminator_width: int = Field(default=32, ge=1)
    sample_every: int = Field(default=1, ge=1, description="Epochs between grids.")
    samples_per_class: int = Field(default=8, ge=1)
    seed: int = Field(default=0)
    progress: bool = Field(default=True)
