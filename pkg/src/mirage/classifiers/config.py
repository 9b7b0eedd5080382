from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from ..common.types import ArchitectureFamily, TrainingRegime

__all__ = ["ArchitectureConfig", "ClassifierMetadata"]


class ArchitectureConfig(BaseModel):
    """Which network to build and for what input."""

    family: ArchitectureFamily = Field(default=ArchitectureFamily.WIDE_RESNET)
    depth: int = Field(
        default=16,
        ge=4,
        description="Wide-resnet depth; must be 6n+4. Ignored for VGG.",
    )
    width: int = Field(
        default=2,
        ge=1,
        description="Wide-resnet widening factor. Ignored for VGG.",
    )
    dropout: float = Field(default=0.0, ge=0.0, lt=1.0)
    input_resolution: int = Field(default=32, ge=4)
    channels: int = Field(default=3, ge=1)
    num_classes: int = Field(default=10, ge=2)
    vgg_hidden_units: int = Field(
        default=512,
        ge=1,
        description="Width of the first of the two fully connected VGG layers.",
    )

    @model_validator(mode="after")
    def validate_family(self) -> ArchitectureConfig:
        if self.family is ArchitectureFamily.WIDE_RESNET and (self.depth - 4) % 6:
            raise ValueError(
                f"Wide-resnet depth must satisfy depth = 6n+4, got: {self.depth}"
            )
        if self.family is ArchitectureFamily.VGG16_STYLE and self.input_resolution % 32:
            raise ValueError(
                "VGG16-style networks need an input resolution divisible by 32, "
                f"got: {self.input_resolution}"
            )
        return self

    @property
    def blocks_per_group(self) -> int:
        return (self.depth - 4) // 6

    @property
    def feature_dim(self) -> int:
        """Channel count of the final convolutional layer."""
        if self.family is ArchitectureFamily.WIDE_RESNET:
            return 64 * self.width
        return 512

    @property
    def label(self) -> str:
        if self.family is ArchitectureFamily.WIDE_RESNET:
            return f"wrn-{self.depth}-{self.width}"
        return "vgg16"


class ClassifierMetadata(BaseModel):
    """Provenance carried by a classifier and its checkpoint."""

    model_id: str = Field(default="model")
    regime: TrainingRegime = Field(default=TrainingRegime.TTM)
    epochs: int = Field(default=0, ge=0, description="Epochs trained so far.")
    seed: int = Field(default=0)
