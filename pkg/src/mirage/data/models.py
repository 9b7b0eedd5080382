from __future__ import annotations

from collections.abc import Sequence

import torch
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..common.types import DatasetRole, SplitTag

__all__ = ["LabeledDataset"]


class LabeledDataset(BaseModel):
    """Images in the pixel domain with their labels and source bookkeeping.

    Images are stored as ``uint8`` tensors of shape ``(N, C, H, W)`` so every
    element is an integer pixel count in [0, 255]; accessors return float32.
    ``source_indices`` are positions in the published split, used to prove
    that the shadow data never overlaps the target training data.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    images: torch.Tensor
    labels: torch.Tensor
    split: SplitTag
    role: DatasetRole = DatasetRole.TARGET
    source_indices: torch.Tensor
    num_classes: int = Field(default=10, ge=2)

    @model_validator(mode="after")
    def validate_shapes(self) -> LabeledDataset:
        if self.images.dtype != torch.uint8 or self.images.ndim != 4:
            raise ValueError("images must be a uint8 tensor of shape (N, C, H, W)")
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"images and labels differ in length: "
                f"{len(self.images)} vs {len(self.labels)}"
            )
        if len(self.source_indices) != len(self.labels):
            raise ValueError("source_indices must align with labels")
        if len(self.labels) and (
            int(self.labels.min()) < 0 or int(self.labels.max()) >= self.num_classes
        ):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        return self

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        _, channels, height, width = self.images.shape
        return (channels, height, width)

    def image(self, index: int) -> torch.Tensor:
        """Return one image as a float32 ``(C, H, W)`` pixel tensor."""
        return self.images[index].to(torch.float32)

    def batch(self, indices: torch.Tensor | Sequence[int]) -> torch.Tensor:
        """Return images at ``indices`` as a float32 ``(N, C, H, W)`` tensor."""
        index = torch.as_tensor(indices, dtype=torch.long)
        return self.images[index].to(torch.float32)

    def subset(self, indices: torch.Tensor | Sequence[int]) -> LabeledDataset:
        index = torch.as_tensor(indices, dtype=torch.long)
        return self.model_copy(
            update={
                "images": self.images[index],
                "labels": self.labels[index],
                "source_indices": self.source_indices[index],
            }
        )

    def of_class(self, class_id: int) -> LabeledDataset:
        return self.subset(torch.nonzero(self.labels == class_id).flatten())

    def as_shadow(self) -> LabeledDataset:
        """Mark this dataset as shadow data for an attack."""
        return self.model_copy(update={"role": DatasetRole.SHADOW})
