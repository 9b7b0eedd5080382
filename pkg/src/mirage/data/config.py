from pathlib import Path

from pydantic import BaseModel, Field, field_validator

__all__ = ["DatasetConfig", "NormalizationSpec", "CIFAR10_NORMALIZATION"]


class NormalizationSpec(BaseModel):
    """Per-channel affine map from pixel space [0, 255] into model space."""

    mean: tuple[float, ...] = Field(
        default=(127.5, 127.5, 127.5),
        description="Per-channel mean in pixel counts.",
    )
    std: tuple[float, ...] = Field(
        default=(127.5, 127.5, 127.5),
        description="Per-channel standard deviation in pixel counts.",
    )

    @field_validator("std")
    @classmethod
    def validate_std(cls, std: tuple[float, ...]) -> tuple[float, ...]:
        if any(value <= 0 for value in std):
            raise ValueError(f"Normalization std must be positive, got: {std}")
        return std

    @property
    def channels(self) -> int:
        return len(self.mean)


# Channel statistics of the CIFAR-10 training split, in pixel counts.
CIFAR10_NORMALIZATION = NormalizationSpec(
    mean=(125.3, 123.0, 113.9),
    std=(63.0, 62.1, 66.7),
)


class DatasetConfig(BaseModel):
    """Where the dataset lives and how much of it to use."""

    source_path: Path | None = Field(
        default=None,
        description="Dataset directory; falls back to $MIRAGE_DATA_DIR when unset.",
    )
    subset_size: int | None = Field(
        default=None,
        ge=1,
        description="Number of training images to keep (desk scale).",
    )
    validation_subset_size: int | None = Field(
        default=None,
        ge=1,
        description="Number of validation (shadow) images to keep.",
    )
    downscale: int | None = Field(
        default=None,
        ge=4,
        description="Optional square resolution the images are resized to.",
    )
    seed: int = Field(default=0, description="Seed for deterministic subsetting.")
    num_classes: int = Field(default=10, ge=2)
